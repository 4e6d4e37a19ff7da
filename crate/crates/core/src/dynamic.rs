//! Toolchain-backed feature measurements: td_1..td_4.
//!
//! td_1 (distinct callee names) is computed statically from the tree. The
//! other three need an external C++ toolchain: td_3 is the line count of
//! the compiler's assembly output, td_2/td_4 are peak resident memory (kB)
//! and wall-clock time (ms) of running the built binary under a timeout.
//! Every failure — missing compiler, compile error, crash, timeout — makes
//! the affected slots unavailable and never aborts a corpus run.
//!
//! td_2 and td_4 are machine-dependent by nature; reproducible pipelines
//! run with the toolchain disabled and train with those slots masked.
//! Executing corpus samples runs untrusted code; confine the process when
//! the corpus is not your own.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::ast::{AstNode, NodeType, PseudoAst};
use crate::corpus::SourceSample;

/// Environment variable overriding the compiler command template.
pub const TOOLCHAIN_ENV: &str = "AUTHATT_TOOLCHAIN";

/// External toolchain configuration. The command is a whitespace-split
/// template; `{in}` and `{out}` expand to the source and output paths.
#[derive(Debug, Clone)]
pub struct ToolchainConfig {
    pub compiler_command: String,
    pub assembly_flag: String,
    pub run_timeout: Duration,
    pub run_stdin: Option<PathBuf>,
    pub enabled: bool,
}

impl Default for ToolchainConfig {
    fn default() -> Self {
        ToolchainConfig {
            compiler_command: "g++ -O0 {in} -o {out}".to_string(),
            assembly_flag: "-S".to_string(),
            run_timeout: Duration::from_secs(2),
            run_stdin: None,
            enabled: true,
        }
    }
}

impl ToolchainConfig {
    /// Default config with the `AUTHATT_TOOLCHAIN` override applied.
    pub fn from_env() -> Self {
        let mut cfg = ToolchainConfig::default();
        if let Ok(cmd) = std::env::var(TOOLCHAIN_ENV) {
            if !cmd.trim().is_empty() {
                cfg.compiler_command = cmd;
            }
        }
        cfg
    }
}

/// Measured dynamic slots, each individually available or not.
#[derive(Debug, Clone, Default)]
pub struct DynamicResult {
    /// (td_1, td_2, td_3, td_4)
    pub values: [f64; 4],
    pub available: [bool; 4],
    pub diagnostics: Vec<String>,
}

impl DynamicResult {
    pub fn slots(&self) -> [(f64, bool); 4] {
        [
            (self.values[0], self.available[0]),
            (self.values[1], self.available[1]),
            (self.values[2], self.available[2]),
            (self.values[3], self.available[3]),
        ]
    }
}

/// td_1: number of distinct callee names across call expressions. The
/// callee name is the last keyword-free identifier leaf in the callee
/// subtree, so `obj.method(x)` counts `method` and `std::max(a,b)` counts
/// `max`. Purely syntactic.
pub fn extract_function_calls(ast: &PseudoAst) -> u64 {
    let mut callees = std::collections::BTreeSet::new();
    ast.root.walk(&mut |n| {
        if n.node_type() != Some(NodeType::CallExpr) {
            return;
        }
        let children = n.children();
        if children.len() < 2 {
            return;
        }
        let callee = &children[0];
        if let Some(name) = last_identifier_leaf(callee) {
            callees.insert(name.to_string());
        }
    });
    callees.len() as u64
}

fn last_identifier_leaf(node: &AstNode) -> Option<&str> {
    let mut last = None;
    node.walk(&mut |n| {
        if let Some(text) = n.leaf_text() {
            if crate::ast::is_identifier_text(text) {
                last = Some(text);
            }
        }
    });
    last
}

fn expand_command(template: &str, input: &Path, output: &Path) -> Option<(String, Vec<String>)> {
    let mut parts = template.split_whitespace().map(|p| {
        p.replace("{in}", &input.display().to_string())
            .replace("{out}", &output.display().to_string())
    });
    let program = parts.next()?;
    Some((program, parts.collect()))
}

fn run_compiler(
    template: &str,
    extra_flag: Option<&str>,
    input: &Path,
    output: &Path,
    diagnostics: &mut Vec<String>,
) -> bool {
    let Some((program, mut args)) = expand_command(template, input, output) else {
        diagnostics.push("empty compiler command".to_string());
        return false;
    };
    if let Some(flag) = extra_flag {
        args.push(flag.to_string());
    }
    let result = std::process::Command::new(&program)
        .args(&args)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status();
    match result {
        Ok(status) if status.success() => true,
        Ok(status) => {
            diagnostics.push(format!("{program} exited with {status}"));
            false
        }
        Err(e) => {
            diagnostics.push(format!("cannot run {program}: {e}"));
            false
        }
    }
}

/// td_3: compile to assembly and count output lines. `None` when disabled,
/// the compiler is missing, or the sample does not compile.
pub fn measure_assembly_length(
    sample: &SourceSample,
    cfg: &ToolchainConfig,
    scratch: &Path,
) -> (Option<u64>, Vec<String>) {
    let mut diagnostics = Vec::new();
    if !cfg.enabled {
        return (None, diagnostics);
    }
    let src = scratch.join("sample.cpp");
    let asm = scratch.join("sample.s");
    if std::fs::write(&src, &sample.body).is_err() {
        diagnostics.push("cannot write scratch source".to_string());
        return (None, diagnostics);
    }
    if !run_compiler(
        &cfg.compiler_command,
        Some(&cfg.assembly_flag),
        &src,
        &asm,
        &mut diagnostics,
    ) {
        return (None, diagnostics);
    }
    match std::fs::read_to_string(&asm) {
        Ok(text) => (Some(text.lines().count() as u64), diagnostics),
        Err(e) => {
            diagnostics.push(format!("assembly output unreadable: {e}"));
            (None, diagnostics)
        }
    }
}

/// Outcome of one timed execution.
struct RunMeasurement {
    peak_rss_kb: u64,
    wall_ms: f64,
}

#[cfg(unix)]
fn run_with_timeout(
    binary: &Path,
    stdin: Option<&Path>,
    timeout: Duration,
    diagnostics: &mut Vec<String>,
) -> Option<RunMeasurement> {
    use std::os::unix::process::ExitStatusExt as _;

    let stdin_cfg = match stdin {
        Some(path) => match std::fs::File::open(path) {
            Ok(f) => std::process::Stdio::from(f),
            Err(e) => {
                diagnostics.push(format!("cannot open stdin file: {e}"));
                return None;
            }
        },
        None => std::process::Stdio::null(),
    };
    let start = Instant::now();
    let child = std::process::Command::new(binary)
        .stdin(stdin_cfg)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .spawn();
    let child = match child {
        Ok(c) => c,
        Err(e) => {
            diagnostics.push(format!("cannot launch binary: {e}"));
            return None;
        }
    };
    let pid = child.id() as libc::pid_t;

    // Poll with wait4 so we get the child's rusage (ru_maxrss is kB on
    // Linux). Kill on timeout.
    let mut status: libc::c_int = 0;
    let mut rusage: libc::rusage = unsafe { std::mem::zeroed() };
    loop {
        let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut rusage) };
        if r == pid {
            break;
        }
        if r < 0 {
            diagnostics.push("wait4 failed".to_string());
            return None;
        }
        if start.elapsed() > timeout {
            unsafe {
                libc::kill(pid, libc::SIGKILL);
                libc::wait4(pid, &mut status, 0, &mut rusage);
            }
            diagnostics.push(format!("timed out after {} ms", timeout.as_millis()));
            return None;
        }
        std::thread::sleep(Duration::from_micros(300));
    }
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let exit = std::process::ExitStatus::from_raw(status);
    if !exit.success() {
        diagnostics.push(format!("binary exited with {exit}"));
        return None;
    }
    Some(RunMeasurement {
        peak_rss_kb: rusage.ru_maxrss.max(0) as u64,
        wall_ms,
    })
}

#[cfg(not(unix))]
fn run_with_timeout(
    _binary: &Path,
    _stdin: Option<&Path>,
    _timeout: Duration,
    diagnostics: &mut Vec<String>,
) -> Option<RunMeasurement> {
    diagnostics.push("execution measurement unsupported on this platform".to_string());
    None
}

/// td_2 and td_4: build a binary and execute it under the timeout.
pub fn measure_runtime(
    sample: &SourceSample,
    cfg: &ToolchainConfig,
    scratch: &Path,
) -> (Option<(u64, f64)>, Vec<String>) {
    let mut diagnostics = Vec::new();
    if !cfg.enabled {
        return (None, diagnostics);
    }
    let src = scratch.join("sample.cpp");
    let bin = scratch.join("sample.bin");
    if std::fs::write(&src, &sample.body).is_err() {
        diagnostics.push("cannot write scratch source".to_string());
        return (None, diagnostics);
    }
    if !run_compiler(&cfg.compiler_command, None, &src, &bin, &mut diagnostics) {
        return (None, diagnostics);
    }
    match run_with_timeout(&bin, cfg.run_stdin.as_deref(), cfg.run_timeout, &mut diagnostics) {
        Some(m) => (Some((m.peak_rss_kb, m.wall_ms)), diagnostics),
        None => (None, diagnostics),
    }
}

/// All four dynamic slots for one sample. td_1 is always available; the
/// rest degrade independently.
pub fn run_dynamic(sample: &SourceSample, ast: &PseudoAst, cfg: &ToolchainConfig) -> DynamicResult {
    let mut result = DynamicResult::default();
    result.values[0] = extract_function_calls(ast) as f64;
    result.available[0] = true;
    if !cfg.enabled {
        return result;
    }
    let scratch = match tempdir_in_os() {
        Ok(d) => d,
        Err(e) => {
            result.diagnostics.push(format!("no scratch dir: {e}"));
            return result;
        }
    };
    let (asm, mut diag) = measure_assembly_length(sample, cfg, scratch.path());
    result.diagnostics.append(&mut diag);
    if let Some(lines) = asm {
        result.values[2] = lines as f64;
        result.available[2] = true;
    }
    let (run, mut diag) = measure_runtime(sample, cfg, scratch.path());
    result.diagnostics.append(&mut diag);
    if let Some((rss_kb, wall_ms)) = run {
        result.values[1] = rss_kb as f64;
        result.available[1] = true;
        result.values[3] = wall_ms;
        result.available[3] = true;
    }
    result
}

struct Scratch(PathBuf);

impl Scratch {
    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn tempdir_in_os() -> std::io::Result<Scratch> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "authattr-dyn-{}-{}",
        std::process::id(),
        n
    ));
    std::fs::create_dir_all(&dir)?;
    Ok(Scratch(dir))
}

/// Run the dynamic pipeline over many samples on a bounded worker pool.
/// Results come back keyed and ordered by input index, so callers stay
/// deterministic regardless of scheduling.
pub fn run_dynamic_batch(
    samples: &[(SourceSample, PseudoAst)],
    cfg: &ToolchainConfig,
    workers: usize,
) -> Vec<DynamicResult> {
    let workers = workers.max(1).min(samples.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<DynamicResult>> = samples
        .iter()
        .map(|_| std::sync::Mutex::new(DynamicResult::default()))
        .collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= samples.len() {
                    break;
                }
                let (sample, ast) = &samples[i];
                *results[i].lock().unwrap() = run_dynamic(sample, ast, cfg);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;
    use crate::lexer::tokenize;

    fn sample(body: &str) -> SourceSample {
        SourceSample {
            sample_id: "t".into(),
            author_id: "a".into(),
            path: PathBuf::from("t.cpp"),
            body: body.into(),
            length_chars: body.chars().count(),
        }
    }

    fn toolchain_present() -> bool {
        std::process::Command::new("g++")
            .arg("--version")
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::null())
            .status()
            .map(|s| s.success())
            .unwrap_or(false)
    }

    const HELLO: &str = "#include <iostream>\nint main(){ std::cout << \"hi\\n\"; return 0; }\n";

    #[test]
    fn call_extraction_counts_distinct_callees() {
        let ast = parse(&tokenize("int main(){ }"));
        assert_eq!(extract_function_calls(&ast), 0);

        let ast = parse(&tokenize(
            "int main(){ printf(\"a\"); printf(\"b\"); scanf(\"%d\", &x); }",
        ));
        assert_eq!(extract_function_calls(&ast), 2, "printf, scanf");

        // invariant under argument changes
        let a = parse(&tokenize("void f(){ g(1); h(2, 3); }"));
        let b = parse(&tokenize("void f(){ g(9, 9, 9); h(); }"));
        assert_eq!(extract_function_calls(&a), extract_function_calls(&b));
    }

    #[test]
    fn qualified_and_member_callees() {
        let ast = parse(&tokenize(
            "void f(){ std::max(1, 2); obj.update(3); obj.update(4); }",
        ));
        // max, update
        assert_eq!(extract_function_calls(&ast), 2);
    }

    #[test]
    fn disabled_toolchain_is_unavailable() {
        let cfg = ToolchainConfig {
            enabled: false,
            ..ToolchainConfig::default()
        };
        let s = sample(HELLO);
        let ast = parse(&tokenize(&s.body));
        let r = run_dynamic(&s, &ast, &cfg);
        assert!(r.available[0], "td_1 is static");
        assert!(!r.available[1] && !r.available[2] && !r.available[3]);
        assert_eq!(r.values[1..4], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn missing_compiler_degrades_with_diagnostic() {
        let cfg = ToolchainConfig {
            compiler_command: "definitely-not-a-compiler-xyz {in} -o {out}".into(),
            ..ToolchainConfig::default()
        };
        let s = sample(HELLO);
        let ast = parse(&tokenize(&s.body));
        let r = run_dynamic(&s, &ast, &cfg);
        assert!(!r.available[2] && !r.available[3]);
        assert!(!r.diagnostics.is_empty());
    }

    #[test]
    fn garbage_source_degrades_not_fatal() {
        if !toolchain_present() {
            eprintln!("skipping: no g++ in environment");
            return;
        }
        let cfg = ToolchainConfig::default();
        let s = sample("@@@ this does not compile @@@");
        let ast = parse(&tokenize(&s.body));
        let r = run_dynamic(&s, &ast, &cfg);
        assert!(r.available[0]);
        assert!(!r.available[1] && !r.available[2] && !r.available[3]);
    }

    #[test]
    fn hello_world_measurements() {
        if !toolchain_present() {
            eprintln!("skipping: no g++ in environment");
            return;
        }
        let cfg = ToolchainConfig::default();
        let s = sample(HELLO);
        let ast = parse(&tokenize(&s.body));
        let r = run_dynamic(&s, &ast, &cfg);
        assert!(r.available[2], "asm length available: {:?}", r.diagnostics);
        assert!(r.values[2] > 0.0);
        assert!(r.available[1] && r.available[3], "{:?}", r.diagnostics);
        assert!(r.values[1] > 0.0, "peak rss positive");
        assert!(r.values[3] >= 0.0 && r.values[3] <= 2000.0);

        // assembly line count is stable across two runs of the same compiler
        let scratch = tempdir_in_os().unwrap();
        let (a, _) = measure_assembly_length(&s, &cfg, scratch.path());
        let scratch = tempdir_in_os().unwrap();
        let (b, _) = measure_assembly_length(&s, &cfg, scratch.path());
        assert_eq!(a, b);
    }

    #[test]
    fn timeout_and_nonzero_exit_degrade() {
        if !toolchain_present() {
            eprintln!("skipping: no g++ in environment");
            return;
        }
        let cfg = ToolchainConfig {
            run_timeout: Duration::from_millis(200),
            ..ToolchainConfig::default()
        };
        let spin = sample("int main(){ for(;;){} return 0; }");
        let ast = parse(&tokenize(&spin.body));
        let r = run_dynamic(&spin, &ast, &cfg);
        assert!(r.available[2], "compiles fine");
        assert!(!r.available[1] && !r.available[3], "timeout masks runtime");
        assert!(r.diagnostics.iter().any(|d| d.contains("timed out")));

        let failing = sample("int main(){ return 3; }");
        let ast = parse(&tokenize(&failing.body));
        let r = run_dynamic(&failing, &ast, &ToolchainConfig::default());
        assert!(!r.available[1] && !r.available[3], "nonzero exit masks runtime");
    }

    #[test]
    fn batch_runs_bounded_pool_in_input_order() {
        let cfg = ToolchainConfig {
            enabled: false,
            ..ToolchainConfig::default()
        };
        let bodies = ["int main(){ f(); }", "int main(){ f(); g(); }", "int x;"];
        let inputs: Vec<(SourceSample, PseudoAst)> = bodies
            .iter()
            .map(|b| {
                let s = sample(b);
                let ast = parse(&tokenize(&s.body));
                (s, ast)
            })
            .collect();
        let out = run_dynamic_batch(&inputs, &cfg, 2);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].values[0], 1.0);
        assert_eq!(out[1].values[0], 2.0);
        assert_eq!(out[2].values[0], 0.0);
    }
}
