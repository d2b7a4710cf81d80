#include "scd/report.hpp"

#include <json.hpp>

namespace scd {

using nlohmann::json;

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::MaxIter: return "MaxIter";
        case SolveStatus::NewtonBreakdown: return "NewtonBreakdown";
        case SolveStatus::QPFailure: return "QPFailure";
        case SolveStatus::LineSearchStall: return "LineSearchStall";
        case SolveStatus::ResolventFailure: return "ResolventFailure";
    }
    return "Unknown";
}

const char* to_string(MethodTag t) {
    switch (t) {
        case MethodTag::Newton: return "Newton";
        case MethodTag::Fallback: return "Fallback";
        case MethodTag::Heuristic: return "Heuristic";
    }
    return "Unknown";
}

namespace {

Result<SolveStatus> status_from_string(const std::string& s) {
    for (SolveStatus v : {SolveStatus::Converged, SolveStatus::MaxIter, SolveStatus::NewtonBreakdown,
                          SolveStatus::QPFailure, SolveStatus::LineSearchStall, SolveStatus::ResolventFailure})
        if (s == to_string(v)) return v;
    return Fail::InvalidInput;
}

Result<MethodTag> tag_from_string(const std::string& s) {
    for (MethodTag v : {MethodTag::Newton, MethodTag::Fallback, MethodTag::Heuristic})
        if (s == to_string(v)) return v;
    return Fail::InvalidInput;
}

}  // namespace

std::string report_to_json(const SolveReport& r, bool include_solution) {
    json j;
    j["status"] = to_string(r.status);
    j["iterations"] = r.iterations;
    j["initial_residual"] = r.initial_residual;
    j["final_residual"] = r.final_residual;
    j["wall_time"] = r.wall_time;
    json hist = json::array();
    for (const auto& h : r.residual_history) {
        hist.push_back({{"iter", h.iter}, {"residual", h.residual}, {"method", to_string(h.method)}, {"alpha", h.alpha}});
    }
    j["residual_history"] = hist;
    if (include_solution) j["solution"] = r.solution;
    if (!r.newton_rn.empty()) j["newton_rn"] = r.newton_rn;
    return j.dump(2);
}

Result<SolveReport> report_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) return Fail::InvalidInput;
    SolveReport r;
    try {
        auto st = status_from_string(j.at("status").get<std::string>());
        if (!st) return st.error();
        r.status = *st;
        r.iterations = j.at("iterations").get<int>();
        r.initial_residual = j.at("initial_residual").get<double>();
        r.final_residual = j.at("final_residual").get<double>();
        r.wall_time = j.at("wall_time").get<double>();
        for (const auto& h : j.at("residual_history")) {
            auto tag = tag_from_string(h.at("method").get<std::string>());
            if (!tag) return tag.error();
            r.residual_history.push_back(
                {h.at("iter").get<int>(), h.at("residual").get<double>(), *tag, h.at("alpha").get<double>()});
        }
        if (j.contains("solution")) r.solution = j["solution"].get<Vector>();
        if (j.contains("newton_rn")) r.newton_rn = j["newton_rn"].get<std::vector<double>>();
    } catch (const json::exception&) {
        return Fail::InvalidInput;
    }
    return r;
}

}  // namespace scd
