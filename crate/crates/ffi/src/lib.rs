//! C ABI over `adastream`.
//!
//! Instances are opaque `AdsInstance` handles created by one of the
//! constructors and released with [`ads_instance_free`]. Every fallible
//! function returns an [`AdsStatus`]; on failure the message is available
//! from [`ads_last_error`] on the same thread until the next call. Strings
//! returned through `char **` out-parameters are owned by the caller and
//! must be released with [`ads_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adastream::eval::{estimate_v, evaluate, EvalMode, OrderSelection, PolicySpec, VEstimate, VMode};
use adastream::instances::{self, Family, GeneratorSpec};
use adastream::model::Instance;
use adastream::policies::{optimal_value, PoolPolicySpec, StreamAlgorithm, StreamPolicySpec};
use adastream::utility::{check_all, Property};
use adastream::Error;

/// Opaque instance handle.
pub struct AdsInstance(Instance);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdsStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    NullOrInvalidArgument = 1,
    /// Bad configuration: unknown names, invalid `(α, β)`, unreadable files.
    Config = 2,
    /// A state-space, order or generator cap was exceeded.
    CapExceeded = 3,
    /// The instance or request violates a model invariant.
    Model = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdsFamily {
    Coverage = 0,
    Viral = 1,
    Versionspace = 2,
    TableRandom = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdsPolicy {
    ThresholdUniform = 0,
    ThresholdKnapsack = 1,
    ThresholdKnapsackPlus = 2,
    MixedSingleton = 3,
    PoolGreedy = 4,
    PoolDensityGreedy = 5,
    BestSingleton = 6,
    Oracle = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdsVMode {
    Greedy = 0,
    DensityGreedy = 1,
    Exact = 2,
}

/// Result of the four property checkers.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AdsProperties {
    pub adaptive_monotone: bool,
    pub adaptive_submodular: bool,
    pub semi_policywise: bool,
    pub policywise: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> AdsStatus {
    match err.exit_code() {
        2 => AdsStatus::Config,
        3 => AdsStatus::CapExceeded,
        _ => AdsStatus::Model,
    }
}

enum Failure {
    Arg(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status and the
/// thread-local message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AdsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AdsStatus::Ok,
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg.to_owned());
            AdsStatus::NullOrInvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".to_owned());
            AdsStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Arg(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Arg(what))
}

unsafe fn instance_arg<'a>(p: *const AdsInstance) -> Result<&'a Instance, Failure> {
    p.as_ref().map(|h| &h.0).ok_or(Failure::Arg("instance handle is null"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Arg("output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Arg("string contains NUL"))?;
    write_out(out, c.into_raw())
}

unsafe fn write_handle(out: *mut *mut AdsInstance, inst: Instance) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(AdsInstance(inst))))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ads_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ads_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_instance_from_json(json: *const c_char, out: *mut *mut AdsInstance) -> AdsStatus {
    guard(|| {
        let inst = instances::from_json_str(str_arg(json, "json is null or not UTF-8")?)?;
        write_handle(out, inst)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_instance_load(path: *const c_char, out: *mut *mut AdsInstance) -> AdsStatus {
    guard(|| {
        let inst = instances::load(str_arg(path, "path is null or not UTF-8")?)?;
        write_handle(out, inst)
    })
}

/// Generates a unit-cost instance from a family.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_instance_generate(
    family: AdsFamily,
    n: usize,
    num_states: usize,
    budget: f64,
    seed: u64,
    out: *mut *mut AdsInstance,
) -> AdsStatus {
    guard(|| {
        let family = match family {
            AdsFamily::Coverage => Family::Coverage,
            AdsFamily::Viral => Family::Viral,
            AdsFamily::Versionspace => Family::Versionspace,
            AdsFamily::TableRandom => Family::TableRandom,
        };
        let inst = instances::generate(&GeneratorSpec::new(family, n, num_states, budget, seed))?;
        write_handle(out, inst)
    })
}

/// # Safety
/// `inst` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ads_instance_free(inst: *mut AdsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of items, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ads_instance_num_items(inst: *const AdsInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.0.n())
}

/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_instance_to_json(inst: *const AdsInstance, out: *mut *mut c_char) -> AdsStatus {
    guard(|| write_string(out, instances::to_json_string(instance_arg(inst)?)))
}

/// Hex SHA-256 of the canonical instance document.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_instance_hash(inst: *const AdsInstance, out: *mut *mut c_char) -> AdsStatus {
    guard(|| write_string(out, instances::instance_hash(instance_arg(inst)?)))
}

/// Expected utility of the optimal pool-based policy.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_optimal_value(inst: *const AdsInstance, out: *mut f64) -> AdsStatus {
    guard(|| write_out(out, optimal_value(instance_arg(inst)?)?))
}

fn vmode(mode: AdsVMode) -> VMode {
    match mode {
        AdsVMode::Greedy => VMode::Greedy,
        AdsVMode::DensityGreedy => VMode::DensityGreedy,
        AdsVMode::Exact => VMode::Exact,
    }
}

/// Offline estimate of `v` with its certified `(α, β)`.
///
/// # Safety
/// `inst` must be a live handle; the three outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_estimate_v(
    inst: *const AdsInstance,
    mode: AdsVMode,
    v: *mut f64,
    alpha: *mut f64,
    beta: *mut f64,
) -> AdsStatus {
    guard(|| {
        let est = estimate_v(instance_arg(inst)?, vmode(mode))?;
        write_out(v, est.v)?;
        write_out(alpha, est.alpha)?;
        write_out(beta, est.beta)
    })
}

/// Runs the four property checkers.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_check_properties(inst: *const AdsInstance, out: *mut AdsProperties) -> AdsStatus {
    guard(|| {
        let mut props = AdsProperties::default();
        for r in check_all(instance_arg(inst)?)? {
            let slot = match r.property {
                Property::AdaptiveMonotone => &mut props.adaptive_monotone,
                Property::AdaptiveSubmodular => &mut props.adaptive_submodular,
                Property::SemiPolicywise => &mut props.semi_policywise,
                Property::Policywise => &mut props.policywise,
            };
            *slot = r.holds;
        }
        write_out(out, props)
    })
}

/// Evaluates `policy` exactly over every arrival order and writes the JSON
/// report. Stream policies use `v` from `mode`; `seed` drives the mixed
/// policy's coin.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ads_evaluate_json(
    inst: *const AdsInstance,
    policy: AdsPolicy,
    mode: AdsVMode,
    seed: u64,
    out: *mut *mut c_char,
) -> AdsStatus {
    guard(|| {
        let inst = instance_arg(inst)?;
        let stream = |a| -> Result<(PolicySpec, Option<VEstimate>), Error> {
            let est = estimate_v(inst, vmode(mode))?;
            let spec = StreamPolicySpec::new(a, est.v, est.provenance)?.with_seed(seed);
            Ok((PolicySpec::Stream(spec), Some(est)))
        };
        let pool = |p| Ok((PolicySpec::Pool(p), None));
        let (spec, est) = match policy {
            AdsPolicy::ThresholdUniform => {
                inst.cardinality_budget()?;
                stream(StreamAlgorithm::ThresholdUniform)
            }
            AdsPolicy::ThresholdKnapsack => stream(StreamAlgorithm::ThresholdKnapsack),
            AdsPolicy::ThresholdKnapsackPlus => stream(StreamAlgorithm::ThresholdKnapsackPlus),
            AdsPolicy::MixedSingleton => stream(StreamAlgorithm::MixedSingleton),
            AdsPolicy::PoolGreedy => {
                inst.cardinality_budget()?;
                pool(PoolPolicySpec::AdaptiveGreedy)
            }
            AdsPolicy::PoolDensityGreedy => pool(PoolPolicySpec::DensityGreedy),
            AdsPolicy::BestSingleton => pool(PoolPolicySpec::BestSingleton),
            AdsPolicy::Oracle => pool(PoolPolicySpec::OptimalOracle),
        }?;
        let name = est.as_ref().map(|_| vmode(mode).name());
        let report = evaluate(inst, &spec, est.as_ref(), name, &OrderSelection::All, EvalMode::Exact)?;
        write_string(out, report.to_json())
    })
}
