//! Temperature-dependent material and hardware curves.
//!
//! All curves are immutable values; every evaluation checks the declared
//! temperature domain and refuses to extrapolate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lower domain bound, 4 mK.
pub const DEFAULT_T_MIN: f64 = 4e-3;
/// Default upper domain bound, 300 K.
pub const DEFAULT_T_MAX: f64 = 300.0;

/// Closed temperature interval on which a curve may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain {
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
        }
    }
}

impl Domain {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min > 0.0 && t_max > t_min) {
            return Err(Error::domain(format!(
                "invalid domain [{t_min}, {t_max}] K"
            )));
        }
        Ok(Domain { t_min, t_max })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }

    fn check(&self, t: f64, what: &str) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} evaluated at {t} K outside [{}, {}] K",
                self.t_min, self.t_max
            )))
        }
    }
}

/// Coefficients of the NIST copper thermal conductivity fit as a function of
/// RRR (NIST Monograph 177, Simon, Drexler & Reed 1992, p. 7-16; Hust &
/// Lankford form). Revision tag bumps whenever a coefficient changes.
pub mod nist_copper {
    pub const REVISION: &str = "NIST-MN177-1992/r1";
    pub const BETA_NUMERATOR: f64 = 0.634;
    pub const BETA_REF: f64 = 0.0003;
    pub const P1: f64 = 1.754e-8;
    pub const P2: f64 = 2.763;
    pub const P3: f64 = 1102.0;
    pub const P4: f64 = -0.165;
    pub const P5: f64 = 70.0;
    pub const P6: f64 = 1.756;
    pub const P7_NUMERATOR: f64 = 0.838;
    pub const P7_EXPONENT: f64 = 0.1661;

    /// Thermal conductivity of copper in W/(K m). No domain check.
    pub fn conductivity(rrr: f64, t: f64) -> f64 {
        let beta = BETA_NUMERATOR / rrr;
        let beta_r = beta / BETA_REF;
        let p7 = P7_NUMERATOR / beta_r.powf(P7_EXPONENT);
        let w0 = beta / t;
        let wi = P1 * t.powf(P2) / (1.0 + P1 * P3 * t.powf(P2 + P4) * (-(P5 / t).powf(P6)).exp());
        let wi0 = p7 * wi * w0 / (wi + w0);
        1.0 / (w0 + wi + wi0)
    }
}

/// One piece of a piecewise power law `rho(T) = a + b T^c` on `[t_lo, t_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSegment {
    pub t_lo: f64,
    pub t_hi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PowerLawSegment {
    fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t.powf(self.c)
    }

    fn antiderivative(&self, t: f64) -> f64 {
        let power = if (self.c + 1.0).abs() < 1e-12 {
            t.ln()
        } else {
            t.powf(self.c + 1.0) / (self.c + 1.0)
        };
        self.a * t + self.b * power
    }
}

/// Temperature-dependent thermal conductivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConductivityModel {
    NistRrrCopper {
        rrr: f64,
        domain: Domain,
    },
    PowerLawPiecewise {
        segments: Vec<PowerLawSegment>,
    },
    /// Log-log linear interpolation between strictly increasing samples.
    Tabulated {
        points: Vec<(f64, f64)>,
    },
}

impl ConductivityModel {
    pub fn nist_copper(rrr: f64) -> Result<Self> {
        Self::nist_copper_on(rrr, Domain::default())
    }

    pub fn nist_copper_on(rrr: f64, domain: Domain) -> Result<Self> {
        let m = ConductivityModel::NistRrrCopper { rrr, domain };
        m.validate()?;
        Ok(m)
    }

    /// Single-segment power law `a + b T^c` on `domain`.
    pub fn power_law(a: f64, b: f64, c: f64, domain: Domain) -> Result<Self> {
        let m = ConductivityModel::PowerLawPiecewise {
            segments: vec![PowerLawSegment {
                t_lo: domain.t_min,
                t_hi: domain.t_max,
                a,
                b,
                c,
            }],
        };
        m.validate()?;
        Ok(m)
    }

    pub fn piecewise(segments: Vec<PowerLawSegment>) -> Result<Self> {
        let m = ConductivityModel::PowerLawPiecewise { segments };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        let m = ConductivityModel::Tabulated { points };
        m.validate()?;
        Ok(m)
    }

    /// Checks the model invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConductivityModel::NistRrrCopper { rrr, domain } => {
                if !(rrr.is_finite() && *rrr > 1.0) {
                    return Err(Error::domain(format!("RRR must exceed 1, got {rrr}")));
                }
                Domain::new(domain.t_min, domain.t_max)?;
            }
            ConductivityModel::PowerLawPiecewise { segments } => {
                if segments.is_empty() {
                    return Err(Error::domain("power law needs at least one segment"));
                }
                for (i, s) in segments.iter().enumerate() {
                    if !(s.t_lo >= 0.0 && s.t_hi > s.t_lo) {
                        return Err(Error::domain(format!("segment {i} has empty range")));
                    }
                    if i > 0 {
                        let prev = segments[i - 1].t_hi;
                        if (s.t_lo - prev).abs() > 1e-12 * prev.max(1.0) {
                            return Err(Error::domain(format!(
                                "segment {i} starts at {} K but previous ends at {prev} K",
                                s.t_lo
                            )));
                        }
                    }
                    // a + b T^c is monotone on the segment so endpoint checks suffice
                    // (T = 0 is only reachable with c >= 0)
                    let lo = if s.t_lo == 0.0 && s.c < 0.0 {
                        f64::INFINITY
                    } else {
                        s.eval(s.t_lo)
                    };
                    let hi = s.eval(s.t_hi);
                    let positive_lo = lo > 0.0 || (s.t_lo == 0.0 && s.b > 0.0 && s.a >= 0.0);
                    if !(positive_lo && hi > 0.0) {
                        return Err(Error::domain(format!(
                            "segment {i} has non-positive conductivity"
                        )));
                    }
                }
            }
            ConductivityModel::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::domain(
                        "tabulated conductivity needs at least two points",
                    ));
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::domain(
                            "tabulated temperatures must be strictly increasing",
                        ));
                    }
                }
                if points.iter().any(|&(t, k)| !(t > 0.0 && k > 0.0)) {
                    return Err(Error::domain("tabulated points must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        match self {
            ConductivityModel::NistRrrCopper { domain, .. } => *domain,
            ConductivityModel::PowerLawPiecewise { segments } => Domain {
                t_min: segments[0].t_lo,
                t_max: segments[segments.len() - 1].t_hi,
            },
            ConductivityModel::Tabulated { points } => Domain {
                t_min: points[0].0,
                t_max: points[points.len() - 1].0,
            },
        }
    }

    /// Thermal conductivity at `t` in W/(K m).
    pub fn conductivity(&self, t: f64) -> Result<f64> {
        self.domain().check(t, "conductivity")?;
        Ok(self.conductivity_unchecked(t))
    }

    pub(crate) fn conductivity_unchecked(&self, t: f64) -> f64 {
        match self {
            ConductivityModel::NistRrrCopper { rrr, .. } => nist_copper::conductivity(*rrr, t),
            ConductivityModel::PowerLawPiecewise { segments } => {
                let seg = segments
                    .iter()
                    .find(|s| t <= s.t_hi)
                    .unwrap_or(&segments[segments.len() - 1]);
                seg.eval(t)
            }
            ConductivityModel::Tabulated { points } => {
                let i = points
                    .partition_point(|p| p.0 <= t)
                    .clamp(1, points.len() - 1);
                let (t0, k0) = points[i - 1];
                let (t1, k1) = points[i];
                let m = (k1 / k0).ln() / (t1 / t0).ln();
                k0 * (t / t0).powf(m)
            }
        }
    }

    /// `\int_{t_lo}^{t_hi} rho(T) dT` in W/m.
    pub fn integral(&self, t_lo: f64, t_hi: f64) -> Result<f64> {
        if t_lo > t_hi {
            return Err(Error::domain(format!(
                "integral bounds reversed: {t_lo} K > {t_hi} K"
            )));
        }
        let d = self.domain();
        d.check(t_lo, "conductivity integral")?;
        d.check(t_hi, "conductivity integral")?;
        if t_lo == t_hi {
            return Ok(0.0);
        }
        Ok(match self {
            ConductivityModel::NistRrrCopper { rrr, .. } => {
                let rrr = *rrr;
                quad_smooth(|t| nist_copper::conductivity(rrr, t), t_lo, t_hi)
            }
            ConductivityModel::PowerLawPiecewise { segments } => segments
                .iter()
                .filter(|s| s.t_hi > t_lo && s.t_lo < t_hi)
                .map(|s| {
                    let lo = t_lo.max(s.t_lo);
                    let hi = t_hi.min(s.t_hi);
                    s.antiderivative(hi) - s.antiderivative(lo)
                })
                .sum(),
            ConductivityModel::Tabulated { points } => {
                let mut total = 0.0;
                for w in points.windows(2) {
                    let (ta, ka) = w[0];
                    let (tb, kb) = w[1];
                    let lo = t_lo.max(ta);
                    let hi = t_hi.min(tb);
                    if hi <= lo {
                        continue;
                    }
                    let m = (kb / ka).ln() / (tb / ta).ln();
                    // k = ka (T/ta)^m  ->  ka ta^-m T^(m+1)/(m+1)
                    let f = |t: f64| {
                        if (m + 1.0).abs() < 1e-12 {
                            ka * ta * t.ln()
                        } else {
                            ka * ta * (t / ta).powf(m + 1.0) / (m + 1.0)
                        }
                    };
                    total += f(hi) - f(lo);
                }
                total
            }
        })
    }
}

/// Integrates a smooth positive function, splitting the range in log space
/// so each piece spans at most a factor of two in temperature.
fn quad_smooth(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let pieces = ((b / a).log2().ceil() as usize).max(1);
    let ratio = (b / a).powf(1.0 / pieces as f64);
    let mut total = 0.0;
    let mut lo = a;
    for i in 0..pieces {
        let hi = if i + 1 == pieces { b } else { lo * ratio };
        let scale = f(0.5 * (lo + hi)).abs() * (hi - lo);
        let out = quadrature::integrate(&f, lo, hi, 1e-14 * scale.max(f64::MIN_POSITIVE));
        total += out.integral;
        lo = hi;
    }
    total
}

/// Cooling power of a sink, `P(T) = prefactor (T/T0 - offset)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingCurve {
    pub t0: f64,
    pub prefactor: f64,
    pub offset: f64,
    pub exponent: f64,
    /// Highest plate temperature the curve is trusted for.
    pub t_max: f64,
}

impl CoolingCurve {
    pub fn new(t0: f64, prefactor: f64, offset: f64, exponent: f64) -> Result<Self> {
        let c = CoolingCurve {
            t0,
            prefactor,
            offset,
            exponent,
            t_max: DEFAULT_T_MAX,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.prefactor > 0.0 && self.exponent > 0.0 && self.offset >= 0.0) {
            return Err(Error::domain(format!(
                "cooling curve needs T0, prefactor, exponent > 0 and offset >= 0, got {self:?}"
            )));
        }
        if !(self.t_max > self.t0 * self.offset) {
            return Err(Error::domain(
                "cooling curve upper bound below its zero point",
            ));
        }
        Ok(())
    }

    /// Temperature at which the curve delivers zero cooling.
    pub fn zero_point(&self) -> f64 {
        self.t0 * self.offset
    }

    /// Cooling power in W at plate temperature `t`.
    pub fn power(&self, t: f64) -> Result<f64> {
        let x = t / self.t0 - self.offset;
        if x < 0.0 || t > self.t_max {
            return Err(Error::domain(format!(
                "cooling curve evaluated at {t} K outside [{}, {}] K",
                self.zero_point(),
                self.t_max
            )));
        }
        Ok(self.prefactor * x.powf(self.exponent))
    }

    /// Plate temperature at which the sink extracts exactly `q` watts.
    pub fn invert(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(Error::domain(format!(
                "cooling power must be non-negative, got {q} W"
            )));
        }
        let t = self.t0 * (self.offset + (q / self.prefactor).powf(1.0 / self.exponent));
        if t > self.t_max {
            return Err(Error::domain(format!(
                "{q} W needs a plate at {t} K, above the curve limit {} K",
                self.t_max
            )));
        }
        Ok(t)
    }
}

/// Lumped thermal resistance of an interface or hardware element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResistanceCurve {
    /// `R(T) = r0 (T/t0)^exponent`.
    PowerLaw {
        r0: f64,
        t0: f64,
        exponent: f64,
        domain: Domain,
    },
    /// `R(T) = r0 rho(t_ref) / rho(T)`, a resistance shaped like the inverse
    /// conductivity of `model`.
    ConductivityShaped {
        r0: f64,
        t_ref: f64,
        model: ConductivityModel,
    },
}

impl ResistanceCurve {
    pub fn power_law(r0: f64, t0: f64, exponent: f64) -> Result<Self> {
        let r = ResistanceCurve::PowerLaw {
            r0,
            t0,
            exponent,
            domain: Domain::default(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn conductivity_shaped(r0: f64, t_ref: f64, model: ConductivityModel) -> Result<Self> {
        let r = ResistanceCurve::ConductivityShaped { r0, t_ref, model };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ResistanceCurve::PowerLaw {
                r0,
                t0,
                exponent,
                domain,
            } => {
                if !(*r0 > 0.0 && *t0 > 0.0 && exponent.is_finite()) {
                    return Err(Error::domain(
                        "power-law resistance needs r0 > 0 and T0 > 0",
                    ));
                }
                Domain::new(domain.t_min, domain.t_max)?;
            }
            ResistanceCurve::ConductivityShaped { r0, t_ref, model } => {
                model.validate()?;
                if !(*r0 > 0.0) {
                    return Err(Error::domain("resistance prefactor must be positive"));
                }
                if !model.domain().contains(*t_ref) {
                    return Err(Error::domain(
                        "reference temperature outside the conductivity domain",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        match self {
            ResistanceCurve::PowerLaw { domain, .. } => *domain,
            ResistanceCurve::ConductivityShaped { model, .. } => model.domain(),
        }
    }

    /// Resistance in K/W at temperature `t`.
    pub fn resistance(&self, t: f64) -> Result<f64> {
        self.domain().check(t, "resistance")?;
        Ok(match self {
            ResistanceCurve::PowerLaw {
                r0, t0, exponent, ..
            } => r0 * (t / t0).powf(*exponent),
            ResistanceCurve::ConductivityShaped { r0, t_ref, model } => {
                r0 * model.conductivity_unchecked(*t_ref) / model.conductivity_unchecked(t)
            }
        })
    }
}
