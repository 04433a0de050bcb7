//! C ABI over `aesthetics-core`.
//!
//! Every fallible function returns an [`AesStatus`]; on failure the message
//! is available from [`aes_last_error`] on the same thread. Objects are
//! opaque handles released with their `_free` function. Strings handed out
//! by the library are NUL-terminated UTF-8 and released with
//! [`aes_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aesthetics_core::generator::{generate_element, generate_element_set, GeneratorParams};
use aesthetics_core::geometry::find_crossings;
use aesthetics_core::metrics::{evaluate, evaluate_all};
use aesthetics_core::optimizer::{optimize_layout, AnnealConfig, Objective};
use aesthetics_core::render::render_svg;
use aesthetics_core::rgt::{create_study, ConstructRequest, Element, RgtError, Session, SessionState, Study, StudyConfig};
use aesthetics_core::{catalog, validate_drawing, Drawing, Graph, MetricId};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AesStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidDrawing = 4,
    UnknownMetric = 5,
    InvalidArgument = 6,
    SessionFinished = 7,
    SessionError = 8,
    Panic = 9,
}

/// Parsed, validated drawing.
pub struct AesDrawing(Drawing);

/// Element pool plus study configuration.
pub struct AesStudy(Study);

/// One interview.
pub struct AesSession(Session);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AesMetricResult {
    pub raw: f64,
    pub score: f64,
    pub defined: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AesStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: AesStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> AesStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AesStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AesStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(AesStatus::NullPointer, format!("`{name}` is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(AesStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .map_or_else(|| fail(AesStatus::NullPointer, format!("`{name}` is null")), Ok)
}

unsafe fn mut_arg<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .map_or_else(|| fail(AesStatus::NullPointer, format!("`{name}` is null")), Ok)
}

unsafe fn put<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return fail(AesStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).or_else(|_| fail(AesStatus::InvalidArgument, "string holds a NUL byte"))?;
    put(out, c.into_raw())
}

fn session_failure(e: RgtError) -> Failure {
    let status = match e {
        RgtError::SessionFinished => AesStatus::SessionFinished,
        _ => AesStatus::SessionError,
    };
    Failure(status, e.to_string())
}

fn metric_id(name: &str) -> FfiResult<MetricId> {
    name.parse()
        .or_else(|_| fail(AesStatus::UnknownMetric, format!("unknown metric `{name}`")))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aes_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn aes_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of aesthetics in the catalog.
#[no_mangle]
pub extern "C" fn aes_catalog_len() -> usize {
    catalog().len()
}

/// Catalog id at `index` as a static string, or null when out of range.
#[no_mangle]
pub extern "C" fn aes_catalog_id(index: usize) -> *const c_char {
    static IDS: std::sync::OnceLock<Vec<CString>> = std::sync::OnceLock::new();
    let ids = IDS.get_or_init(|| {
        catalog()
            .iter()
            .map(|e| CString::new(e.id.as_str()).expect("ids are plain ASCII"))
            .collect()
    });
    ids.get(index).map_or(ptr::null(), |c| c.as_ptr())
}

/// Parses and validates a drawing from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_drawing_from_json(json: *const c_char, out: *mut *mut AesDrawing) -> AesStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let d: Drawing = serde_json::from_str(text).map_err(|e| Failure(AesStatus::ParseError, e.to_string()))?;
        let problems = validate_drawing(&d);
        if !problems.is_empty() {
            return fail(AesStatus::InvalidDrawing, problems.join("; "));
        }
        put(out, Box::into_raw(Box::new(AesDrawing(d))))
    })
}

/// One random element drawing for `seed` with default generator settings.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_drawing_generate(seed: u64, out: *mut *mut AesDrawing) -> AesStatus {
    guard(|| {
        let d = generate_element(&GeneratorParams::with_seed(seed))
            .map_err(|e| Failure(AesStatus::InvalidArgument, e.to_string()))?;
        put(out, Box::into_raw(Box::new(AesDrawing(d))))
    })
}

/// # Safety
/// `d` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn aes_drawing_free(d: *mut AesDrawing) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_drawing_to_json(d: *const AesDrawing, out: *mut *mut c_char) -> AesStatus {
    guard(|| {
        let d = ref_arg(d, "drawing")?;
        put_string(out, serde_json::to_string(&d.0).expect("drawings serialize"))
    })
}

/// # Safety
/// `d` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_drawing_size(d: *const AesDrawing, nodes: *mut usize, edges: *mut usize) -> AesStatus {
    guard(|| {
        let d = ref_arg(d, "drawing")?;
        put(nodes, d.0.graph.node_count())?;
        put(edges, d.0.graph.edge_count())
    })
}

/// Number of edge crossings.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_drawing_crossings(d: *const AesDrawing, out: *mut usize) -> AesStatus {
    guard(|| {
        let d = ref_arg(d, "drawing")?;
        put(out, find_crossings(&d.0).len())
    })
}

/// Evaluates one metric by catalog id.
///
/// # Safety
/// `d` must be a live handle, `metric` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn aes_metric_evaluate(
    d: *const AesDrawing,
    metric: *const c_char,
    out: *mut AesMetricResult,
) -> AesStatus {
    guard(|| {
        let d = ref_arg(d, "drawing")?;
        let id = metric_id(str_arg(metric, "metric")?)?;
        let r = evaluate(&d.0, id).map_err(|e| Failure(AesStatus::InvalidDrawing, e.to_string()))?;
        put(
            out,
            AesMetricResult {
                raw: r.raw,
                score: r.score,
                defined: r.defined,
            },
        )
    })
}

/// Every metric as a JSON report.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_metrics_json(d: *const AesDrawing, out: *mut *mut c_char) -> AesStatus {
    guard(|| {
        let d = ref_arg(d, "drawing")?;
        let v = evaluate_all(&d.0).map_err(|e| Failure(AesStatus::InvalidDrawing, e.to_string()))?;
        put_string(out, v.to_json())
    })
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_render_svg(d: *const AesDrawing, out: *mut *mut c_char) -> AesStatus {
    guard(|| {
        let d = ref_arg(d, "drawing")?;
        put_string(out, render_svg(&d.0))
    })
}

/// Lays out a graph (JSON) by simulated annealing. `objective_json` may be
/// null for uniform weights; `iterations` of 0 keeps the default budget.
/// `value` receives the final objective when not null.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_optimize(
    graph_json: *const c_char,
    objective_json: *const c_char,
    seed: u64,
    iterations: usize,
    out: *mut *mut AesDrawing,
    value: *mut f64,
) -> AesStatus {
    guard(|| {
        let g: Graph = serde_json::from_str(str_arg(graph_json, "graph_json")?)
            .map_err(|e| Failure(AesStatus::ParseError, e.to_string()))?;
        g.validate()
            .map_err(|e| Failure(AesStatus::InvalidArgument, e.to_string()))?;
        let objective: Objective = if objective_json.is_null() {
            Objective::default()
        } else {
            serde_json::from_str(str_arg(objective_json, "objective_json")?)
                .map_err(|e| Failure(AesStatus::ParseError, e.to_string()))?
        };
        let mut config = AnnealConfig::with_seed(seed);
        if iterations > 0 {
            config.max_iterations = iterations;
        }
        let outcome =
            optimize_layout(&g, &objective, &config).map_err(|e| Failure(AesStatus::InvalidArgument, e.to_string()))?;
        if !value.is_null() {
            value.write(outcome.value);
        }
        put(out, Box::into_raw(Box::new(AesDrawing(outcome.drawing))))
    })
}

/// Study over `count` generated elements with the default configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_study_generate(seed: u64, count: usize, out: *mut *mut AesStudy) -> AesStatus {
    guard(|| {
        let drawings = generate_element_set(&GeneratorParams::with_seed(seed), count)
            .map_err(|e| Failure(AesStatus::InvalidArgument, e.to_string()))?;
        let elements = drawings
            .into_iter()
            .map(Element::generated)
            .collect::<Result<Vec<_>, _>>()
            .map_err(session_failure)?;
        let study = create_study(elements, StudyConfig::default()).map_err(session_failure)?;
        put(out, Box::into_raw(Box::new(AesStudy(study))))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn aes_study_free(s: *mut AesStudy) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `study` must be a live handle, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aes_session_start(
    study: *const AesStudy,
    session_id: *const c_char,
    participant: *const c_char,
    seed: u64,
    out: *mut *mut AesSession,
) -> AesStatus {
    guard(|| {
        let study = ref_arg(study, "study")?;
        let s = Session::start(
            &study.0,
            str_arg(session_id, "session_id")?,
            str_arg(participant, "participant")?,
            seed,
        );
        put(out, Box::into_raw(Box::new(AesSession(s))))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn aes_session_free(s: *mut AesSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Presents the next triad; writes its JSON (`triad_id` and element ids).
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_session_next_triad(s: *mut AesSession, out: *mut *mut c_char) -> AesStatus {
    guard(|| {
        let s = mut_arg(s, "session")?;
        let t = s.0.next_triad(None).map_err(session_failure)?;
        put_string(out, serde_json::to_string(&t).expect("triads serialize"))
    })
}

/// Records a construct on the open triad and writes its id.
///
/// # Safety
/// `s` must be a live handle, poles NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aes_session_record_construct(
    s: *mut AesSession,
    triad_id: usize,
    pole_a: *const c_char,
    pole_b: *const c_char,
    out: *mut *mut c_char,
) -> AesStatus {
    guard(|| {
        let s = mut_arg(s, "session")?;
        let req = ConstructRequest::new(triad_id, str_arg(pole_a, "pole_a")?, str_arg(pole_b, "pole_b")?);
        let c = s.0.record_construct(None, &req).map_err(session_failure)?;
        put_string(out, c.id)
    })
}

/// Closes the open triad; `finished` receives whether the session ended.
///
/// # Safety
/// `s` must be a live handle; `finished` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_session_complete_triad(s: *mut AesSession, finished: *mut bool) -> AesStatus {
    guard(|| {
        let s = mut_arg(s, "session")?;
        let state = s.0.complete_triad(None).map_err(session_failure)?;
        put(finished, state == SessionState::Finished)
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aes_session_export_json(s: *const AesSession, out: *mut *mut c_char) -> AesStatus {
    guard(|| {
        let s = ref_arg(s, "session")?;
        put_string(out, s.0.export().to_json())
    })
}
