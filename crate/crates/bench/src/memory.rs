//! Resident-memory high-water mark of this process.
//!
//! Linux only: the peak comes from `VmHWM` in `/proc/self/status` and can be
//! reset by writing `5` to `/proc/self/clear_refs`. Elsewhere both calls are
//! no-ops and the peak is unknown.

/// Peak resident set size in bytes, if the platform reports it.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    parse_vm_hwm(&status)
}

/// Starts a new measurement window; returns false if the kernel refused.
pub fn reset_peak_memory() -> bool {
    std::fs::write("/proc/self/clear_refs", "5").is_ok()
}

fn parse_vm_hwm(status: &str) -> Option<u64> {
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}
