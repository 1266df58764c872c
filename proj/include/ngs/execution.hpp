#pragma once

namespace ngs {

/// Serial is the reference path; Parallel runs the same per-item work under
/// OpenMP and must produce bit-identical results.
enum class Execution { Serial, Parallel };

}  // namespace ngs
