//! C ABI over the fracsiv ADI solver.
//!
//! Every function returns an [`FsStatus`]. On failure a description is kept
//! per thread and can be read with [`fs_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fracsiv::scenario::{seeded_initial_conditions, Scenario};
use fracsiv::{grunwald_weights, AdiStepper, Compartment, Diffusion, Domain, Error, SchemeConfig, SivParams, SivState};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    SolverFailure = 4,
    IoError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Plain-data scheme and model configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub r1: f64,
    pub r2: f64,
    pub dt: f64,
    /// Grid intervals along x.
    pub nx: u32,
    /// Grid intervals along y.
    pub ny: u32,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub mu: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub nu: f64,
    /// x diffusion coefficients of S, I, V.
    pub diffusion_x: [f64; 3],
    /// y diffusion coefficients of S, I, V.
    pub diffusion_y: [f64; 3],
}

/// Opaque simulation handle.
pub struct FsSimulation {
    stepper: AdiStepper,
    state: SivState,
    time: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: FsStatus, msg: impl Into<String>) -> FsStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> FsStatus {
    let status = if e.is_solver_failure() {
        FsStatus::SolverFailure
    } else {
        match e {
            Error::Config { .. } => FsStatus::ConfigError,
            Error::Io { .. } | Error::Snapshot { .. } => FsStatus::IoError,
            _ => FsStatus::InvalidArgument,
        }
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> FsStatus) -> FsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FsStatus::Panic, "internal panic"))
}

fn compartment(index: u32) -> Option<Compartment> {
    Compartment::ALL.get(index as usize).copied()
}

impl FsConfig {
    fn scheme(&self) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(self.alpha1, self.alpha2, self.dt, self.nx as usize, self.ny as usize);
        cfg.r1 = self.r1;
        cfg.r2 = self.r2;
        cfg.domain = Domain {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            y_lo: self.y_lo,
            y_hi: self.y_hi,
        };
        cfg
    }

    fn params(&self) -> SivParams {
        let mut p = SivParams::new(self.mu, self.beta, self.gamma, self.theta, self.nu);
        for c in Compartment::ALL {
            p = p.with_diffusion(
                c,
                Diffusion::constant(self.diffusion_x[c.index()], self.diffusion_y[c.index()]),
            );
        }
        p
    }

    fn from_scenario(sc: &Scenario) -> Self {
        let cfg = sc.effective_scheme();
        let p = &sc.params;
        let coeff = |c: Compartment, x: bool| {
            let d = p.diffusion(c);
            let k = if x { &d.a } else { &d.b };
            k.max_value()
        };
        FsConfig {
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
            r1: cfg.r1,
            r2: cfg.r2,
            dt: cfg.dt,
            nx: cfg.nx as u32,
            ny: cfg.ny as u32,
            x_lo: cfg.domain.x_lo,
            x_hi: cfg.domain.x_hi,
            y_lo: cfg.domain.y_lo,
            y_hi: cfg.domain.y_hi,
            mu: p.mu,
            beta: p.beta,
            gamma: p.gamma,
            theta: p.theta,
            nu: p.nu,
            diffusion_x: Compartment::ALL.map(|c| coeff(c, true)),
            diffusion_y: Compartment::ALL.map(|c| coeff(c, false)),
        }
    }
}

fn new_simulation(cfg: SchemeConfig, params: SivParams, out: *mut *mut FsSimulation) -> FsStatus {
    let (nx, ny) = (cfg.nx, cfg.ny);
    match AdiStepper::new(cfg, params) {
        Ok(stepper) => {
            let sim = Box::new(FsSimulation {
                stepper,
                state: SivState::zeros(nx, ny),
                time: 0.0,
            });
            // SAFETY: caller checked `out` is non-null and writable.
            unsafe { *out = Box::into_raw(sim) };
            FsStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Fills `out` with the built-in demo configuration.
///
/// # Safety
/// `out` must be null or point to writable memory for one `FsConfig`.
#[no_mangle]
pub unsafe extern "C" fn fs_config_default(out: *mut FsConfig) -> FsStatus {
    guard(|| {
        if out.is_null() {
            return fail(FsStatus::NullPointer, "out is null");
        }
        // SAFETY: checked non-null above; validity is the caller's contract.
        unsafe { *out = FsConfig::from_scenario(&Scenario::default()) };
        FsStatus::Ok
    })
}

/// Writes the first `count` Grünwald weights of order `alpha` into `out`.
///
/// # Safety
/// `out` must be null or point to `count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_grunwald_weights(alpha: f64, count: usize, out: *mut f64) -> FsStatus {
    guard(|| {
        if out.is_null() {
            return fail(FsStatus::NullPointer, "out is null");
        }
        match grunwald_weights(alpha, count) {
            Ok(w) => {
                // SAFETY: caller provides `count` writable doubles.
                let dst = unsafe { std::slice::from_raw_parts_mut(out, count) };
                dst.copy_from_slice(w.coeffs());
                FsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Creates a simulation with an all-zero state at `t = 0`.
///
/// # Safety
/// `cfg` must be null or point to a valid `FsConfig`; `out` must be null or
/// writable. On success `*out` must later be released with [`fs_simulation_free`].
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_new(cfg: *const FsConfig, out: *mut *mut FsSimulation) -> FsStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(FsStatus::NullPointer, "cfg or out is null");
        }
        // SAFETY: checked non-null; caller guarantees a valid struct.
        let cfg = unsafe { &*cfg };
        new_simulation(cfg.scheme(), cfg.params(), out)
    })
}

/// Creates a simulation from a scenario file, initialised with its initial state.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` as in [`fs_simulation_new`].
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_from_file(path: *const c_char, out: *mut *mut FsSimulation) -> FsStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(FsStatus::NullPointer, "path or out is null");
        }
        // SAFETY: checked non-null; caller guarantees NUL termination.
        let Ok(path) = unsafe { CStr::from_ptr(path) }.to_str() else {
            return fail(FsStatus::InvalidArgument, "path is not UTF-8");
        };
        let sc = match Scenario::from_file(path) {
            Ok(sc) => sc,
            Err(e) => return from_error(e),
        };
        let state = match fracsiv::scenario::initial_state(&sc) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        let status = new_simulation(sc.effective_scheme(), sc.params.clone(), out);
        if status == FsStatus::Ok {
            // SAFETY: `new_simulation` just stored a valid handle.
            unsafe { (**out).state = state };
        }
        status
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_free(sim: *mut FsSimulation) {
    if !sim.is_null() {
        // SAFETY: handle came from `Box::into_raw` and is freed once.
        drop(unsafe { Box::from_raw(sim) });
    }
}

macro_rules! handle {
    ($sim:expr) => {{
        if $sim.is_null() {
            return fail(FsStatus::NullPointer, "simulation handle is null");
        }
        // SAFETY: non-null handles are live boxes owned by the caller.
        unsafe { &mut *$sim }
    }};
}

/// Resets the state to the central-seed initial condition and the time to 0.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_seed(sim: *mut FsSimulation) -> FsStatus {
    guard(|| {
        let sim = handle!(sim);
        match seeded_initial_conditions(sim.stepper.config()) {
            Ok(state) => {
                sim.state = state;
                sim.time = 0.0;
                FsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Advances `steps` time steps. On failure the state is left at the last good step.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_step(sim: *mut FsSimulation, steps: u64) -> FsStatus {
    guard(|| {
        let sim = handle!(sim);
        let dt = sim.stepper.config().dt;
        for _ in 0..steps {
            match sim.stepper.step(&sim.state, sim.time) {
                Ok(next) if next.max_abs().is_finite() => {
                    sim.state = next;
                    sim.time += dt;
                }
                Ok(next) => {
                    return from_error(Error::Unstable {
                        time: sim.time + dt,
                        magnitude: next.max_abs(),
                    })
                }
                Err(e) => return from_error(e),
            }
        }
        FsStatus::Ok
    })
}

/// # Safety
/// `sim` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_time(sim: *const FsSimulation, out: *mut f64) -> FsStatus {
    guard(|| {
        if sim.is_null() || out.is_null() {
            return fail(FsStatus::NullPointer, "sim or out is null");
        }
        // SAFETY: both checked non-null.
        unsafe { *out = (*sim).time };
        FsStatus::Ok
    })
}

/// Number of grid points along x and y (intervals plus one).
///
/// # Safety
/// `sim` must be null or a live handle; `points_x`, `points_y` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_dims(
    sim: *const FsSimulation,
    points_x: *mut usize,
    points_y: *mut usize,
) -> FsStatus {
    guard(|| {
        if sim.is_null() || points_x.is_null() || points_y.is_null() {
            return fail(FsStatus::NullPointer, "null argument");
        }
        // SAFETY: all checked non-null.
        unsafe {
            let cfg = (*sim).stepper.config();
            *points_x = cfg.nx + 1;
            *points_y = cfg.ny + 1;
        }
        FsStatus::Ok
    })
}

/// Copies compartment `c` (0 = S, 1 = I, 2 = V) row-major in y into `buf`.
///
/// # Safety
/// `sim` must be null or a live handle; `buf` null or `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_copy_field(
    sim: *const FsSimulation,
    c: u32,
    buf: *mut f64,
    len: usize,
) -> FsStatus {
    guard(|| {
        if sim.is_null() || buf.is_null() {
            return fail(FsStatus::NullPointer, "sim or buf is null");
        }
        let Some(c) = compartment(c) else {
            return fail(FsStatus::InvalidArgument, format!("compartment index {c} out of range"));
        };
        // SAFETY: checked non-null.
        let field = unsafe { &(&(*sim).state)[c] };
        let src = field.as_slice();
        if len < src.len() {
            return fail(
                FsStatus::BufferTooSmall,
                format!("need {} values, got {len}", src.len()),
            );
        }
        // SAFETY: `buf` holds at least `len >= src.len()` doubles.
        unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
        FsStatus::Ok
    })
}

/// Overwrites compartment `c` from `buf`, which must hold exactly one value per grid point.
///
/// # Safety
/// `sim` must be null or a live handle; `buf` null or `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_simulation_set_field(
    sim: *mut FsSimulation,
    c: u32,
    buf: *const f64,
    len: usize,
) -> FsStatus {
    guard(|| {
        let sim = handle!(sim);
        if buf.is_null() {
            return fail(FsStatus::NullPointer, "buf is null");
        }
        let Some(c) = compartment(c) else {
            return fail(FsStatus::InvalidArgument, format!("compartment index {c} out of range"));
        };
        let dst = sim.state[c].as_mut_slice();
        if len != dst.len() {
            return fail(
                FsStatus::InvalidArgument,
                format!("need {} values, got {len}", dst.len()),
            );
        }
        // SAFETY: `buf` holds `len` readable doubles.
        dst.copy_from_slice(unsafe { std::slice::from_raw_parts(buf, len) });
        FsStatus::Ok
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to fit) and returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: `buf` holds `len > n` bytes.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}
