#pragma once

namespace pwg {

// Execution policy for the hot kernels. Every parallel kernel has a serial
// reference path; both must produce bit-identical results (parallel loops only
// over independent output slots, reductions in fixed index order).
enum class Exec { serial, parallel };

}  // namespace pwg
