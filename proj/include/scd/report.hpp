#pragma once

#include <string>
#include <vector>

#include "scd/errors.hpp"
#include "scd/linalg.hpp"

namespace scd {

enum class SolveStatus : std::uint8_t {
    Converged,
    MaxIter,
    NewtonBreakdown,
    QPFailure,
    LineSearchStall,
    ResolventFailure,
};

enum class MethodTag : std::uint8_t { Newton, Fallback, Heuristic };

const char* to_string(SolveStatus s);
const char* to_string(MethodTag t);

/// History entry for iterate number `iter` (>= 1): its residual and how the
/// step that produced it was taken.
struct HistoryEntry {
    int iter = 0;
    double residual = 0.0;
    MethodTag method = MethodTag::Newton;
    double alpha = 1.0;
};

struct SolveReport {
    SolveStatus status = SolveStatus::MaxIter;
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
    std::vector<HistoryEntry> residual_history;
    Vector solution;
    double wall_time = 0.0;

    // Diagnostics beyond the serialized core.
    std::vector<Vector> iterates;
    std::vector<double> gamma_history;
    std::vector<double> newton_rn;  // r_N^(l) bookkeeping of the hybrid driver

    bool converged() const { return status == SolveStatus::Converged; }
};

std::string report_to_json(const SolveReport& r, bool include_solution = true);
Result<SolveReport> report_from_json(const std::string& text);

}  // namespace scd
