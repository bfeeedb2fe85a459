use crate::error::{ErknError, Result};
use crate::integrator::scheme::ErknScheme;
use crate::phi::{phi_unchecked, sinc_unchecked};
use crate::scalar::Scalar;
use crate::system::{OscillatorySystem, State};

/// `|q| + |p|` beyond which [`integrate`] reports divergence.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Per-block step coefficients for one `(scheme, system, h)`.
#[derive(Debug, Clone, Copy)]
struct BlockCoefficients<T> {
    /// `cos(c1 xi)`
    stage_cos: T,
    /// `h c1 sinc(c1 xi)`
    stage_sinc: T,
    /// `cos(xi)`
    cos: T,
    /// `h sinc(xi)`
    h_sinc: T,
    /// `-h omega^2 sinc(xi)`
    neg_h_w2_sinc: T,
    /// `h^2 bbar1(xi)`
    h2_bbar1: T,
    /// `h b1(xi)`
    h_b1: T,
}

impl<T: Scalar> BlockCoefficients<T> {
    fn new(scheme: &ErknScheme<T>, h: T, omega: T) -> Self {
        let xi = h * omega;
        let c1 = scheme.c1();
        let sinc = sinc_unchecked(xi);
        Self {
            stage_cos: phi_unchecked(0, c1 * xi),
            stage_sinc: h * c1 * sinc_unchecked(c1 * xi),
            cos: phi_unchecked(0, xi),
            h_sinc: h * sinc,
            neg_h_w2_sinc: -h * omega * omega * sinc,
            h2_bbar1: h * h * scheme.bbar1(xi),
            h_b1: h * scheme.b1(xi),
        }
    }
}

/// Scratch storage and coefficient cache for [`step`].
///
/// The cache is keyed by `(h, scheme id, system id)` and rebuilt whenever any
/// of them changes. The workspace also counts steps so that divergence errors
/// can name the failing step.
#[derive(Debug, Clone, Default)]
pub struct StepWorkspace<T> {
    key: Option<(T, u64, u64)>,
    coefficients: Vec<BlockCoefficients<T>>,
    stage: Vec<T>,
    force: Vec<T>,
    steps: usize,
}

impl<T: Scalar> StepWorkspace<T> {
    pub fn new() -> Self {
        Self {
            key: None,
            coefficients: Vec::new(),
            stage: Vec::new(),
            force: Vec::new(),
            steps: 0,
        }
    }

    /// Steps taken since creation or the last [`reset_count`](Self::reset_count).
    pub fn step_count(&self) -> usize {
        self.steps
    }

    pub fn reset_count(&mut self) {
        self.steps = 0;
    }

    fn prepare(&mut self, scheme: &ErknScheme<T>, sys: &OscillatorySystem<T>, h: T) {
        let key = (h, scheme.id(), sys.id());
        if self.key == Some(key) {
            return;
        }
        self.coefficients = (0..sys.blocks().len())
            .map(|j| BlockCoefficients::new(scheme, h, sys.omega(j)))
            .collect();
        self.stage = vec![T::zero(); sys.dim()];
        self.force = vec![T::zero(); sys.dim()];
        self.key = Some(key);
    }
}

/// One step of the one-stage explicit ERKN method, per block `j` with
/// `xi = h omega_j`:
///
/// ```text
/// Q  = cos(c1 xi) q + h c1 sinc(c1 xi) p
/// q+ = cos(xi) q + h sinc(xi) p + h^2 bbar1(xi) g(Q)
/// p+ = -h omega^2 sinc(xi) q + cos(xi) p + h b1(xi) g(Q)
/// ```
///
/// `h` may be negative (used for adjoint checks). Exactly one force
/// evaluation is made.
pub fn step<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
    s: &State<T>,
    ws: &mut StepWorkspace<T>,
) -> Result<State<T>> {
    let mut out = s.clone();
    step_into(scheme, sys, h, s, &mut out, ws)?;
    Ok(out)
}

/// As [`step`], writing into `out` (which must have the system dimension).
pub fn step_into<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
    s: &State<T>,
    out: &mut State<T>,
    ws: &mut StepWorkspace<T>,
) -> Result<()> {
    if !h.is_finite() || h == T::zero() {
        return Err(ErknError::InvalidArgument(format!(
            "step size must be finite and non-zero, got {h}"
        )));
    }
    sys.check_state(s)?;
    sys.check_state(out)?;
    ws.prepare(scheme, sys, h);
    ws.steps += 1;

    for (j, c) in ws.coefficients.iter().enumerate() {
        for i in sys.block_range(j) {
            ws.stage[i] = c.stage_cos * s.q[i] + c.stage_sinc * s.p[i];
        }
    }
    sys.force(&ws.stage, &mut ws.force);
    for (j, c) in ws.coefficients.iter().enumerate() {
        for i in sys.block_range(j) {
            let (q, p, g) = (s.q[i], s.p[i], ws.force[i]);
            out.q[i] = c.cos * q + c.h_sinc * p + c.h2_bbar1 * g;
            out.p[i] = c.neg_h_w2_sinc * q + c.cos * p + c.h_b1 * g;
        }
    }
    if !out.is_finite() {
        return Err(ErknError::Divergence { step: ws.steps });
    }
    Ok(())
}

/// Named observable evaluated on sampled states.
pub struct Observer<'a, T> {
    pub name: String,
    eval: Box<dyn Fn(&State<T>) -> Result<T> + 'a>,
}

impl<'a, T> Observer<'a, T> {
    pub fn new(name: impl Into<String>, eval: impl Fn(&State<T>) -> Result<T> + 'a) -> Self {
        Self {
            name: name.into(),
            eval: Box::new(eval),
        }
    }

    pub fn evaluate(&self, s: &State<T>) -> Result<T> {
        (self.eval)(s)
    }
}

/// Observable values at sampled steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries<T> {
    pub labels: Vec<String>,
    /// Step index of every row.
    pub steps: Vec<usize>,
    /// `t = n h` of every row.
    pub times: Vec<T>,
    pub rows: Vec<Vec<T>>,
    /// State at the last sampled row.
    pub last_state: State<T>,
}

impl<T> SampledSeries<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, label: &str) -> Option<impl Iterator<Item = &T> + '_> {
        let idx = self.labels.iter().position(|l| l == label)?;
        Some(self.rows.iter().map(move |r| &r[idx]))
    }
}

/// Integration failure with the samples recorded before it.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{source}")]
pub struct IntegrationError<T: std::fmt::Debug> {
    pub source: ErknError,
    pub partial: Option<SampledSeries<T>>,
}

impl<T: std::fmt::Debug> From<ErknError> for IntegrationError<T> {
    fn from(source: ErknError) -> Self {
        Self {
            source,
            partial: None,
        }
    }
}

/// Runs `n_steps` fixed steps from `s0`, evaluating every observer at step 0,
/// at every multiple of `sample_every`, and at the final step.
///
/// Non-finite states or `|q| + |p| > DIVERGENCE_BOUND` abort with
/// [`ErknError::Divergence`]; the samples collected so far are attached.
pub fn integrate<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
    s0: &State<T>,
    n_steps: usize,
    sample_every: usize,
    observers: &[Observer<'_, T>],
) -> Result<SampledSeries<T>, IntegrationError<T>> {
    if n_steps == 0 || sample_every == 0 {
        return Err(ErknError::InvalidArgument(format!(
            "n_steps and sample_every must be at least 1 (got {n_steps}, {sample_every})"
        ))
        .into());
    }
    sys.check_state(s0)?;
    let bound = T::lit(DIVERGENCE_BOUND);
    let sample = |s: &State<T>| {
        observers
            .iter()
            .map(|o| o.evaluate(s))
            .collect::<Result<Vec<T>>>()
    };

    let mut series = SampledSeries {
        labels: observers.iter().map(|o| o.name.clone()).collect(),
        steps: vec![0],
        times: vec![T::zero()],
        rows: vec![sample(s0)?],
        last_state: s0.clone(),
    };
    let mut ws = StepWorkspace::new();
    let mut cur = s0.clone();
    let mut next = s0.clone();
    for n in 1..=n_steps {
        let res = step_into(scheme, sys, h, &cur, &mut next, &mut ws).and_then(|_| {
            if next.norm() > bound {
                Err(ErknError::Divergence { step: n })
            } else {
                Ok(())
            }
        });
        if let Err(source) = res {
            let source = match source {
                ErknError::Divergence { .. } => ErknError::Divergence { step: n },
                e => e,
            };
            return Err(IntegrationError {
                source,
                partial: Some(series),
            });
        }
        std::mem::swap(&mut cur, &mut next);
        if n % sample_every == 0 || n == n_steps {
            series.steps.push(n);
            series.times.push(T::from_count(n) * h);
            series.rows.push(sample(&cur)?);
        }
    }
    series.last_state = cur;
    Ok(series)
}

/// Solution after `n_steps` steps, without sampling.
pub fn propagate<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
    s0: &State<T>,
    n_steps: usize,
) -> Result<State<T>> {
    sys.check_state(s0)?;
    let bound = T::lit(DIVERGENCE_BOUND);
    let mut ws = StepWorkspace::new();
    let mut cur = s0.clone();
    let mut next = s0.clone();
    for n in 1..=n_steps {
        step_into(scheme, sys, h, &cur, &mut next, &mut ws).map_err(|e| match e {
            ErknError::Divergence { .. } => ErknError::Divergence { step: n },
            e => e,
        })?;
        if next.norm() > bound {
            return Err(ErknError::Divergence { step: n });
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}
