#pragma once

#include <ostream>

namespace dia::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kMissingFile = 2;
inline constexpr int kFormatError = 3;
inline constexpr int kPipelineError = 4;

/// Entry point of the dia_analogy tool. Writes A_prime.png, B.png,
/// phi_ab.nnf, phi_ba.nnf and optionally diagnostics.txt into --out.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dia::cli
