#include <json.hpp>

#include "scd/cournot.hpp"

namespace scd::cournot {

using nlohmann::json;

namespace {

json matrix_to_json(const DenseMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Result<DenseMatrix> matrix_from_json(const json& j, int expect_cols) {
    if (!j.is_array()) return Fail::InvalidInput;
    const int rows = static_cast<int>(j.size());
    DenseMatrix m(rows, expect_cols);
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != expect_cols) return Fail::InvalidInput;
        for (int c = 0; c < expect_cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

}  // namespace

std::string instance_to_json(const CournotInstance& inst) {
    json j;
    j["n"] = inst.n;
    j["m"] = inst.m;
    j["elasticity"] = inst.elasticity;
    j["eps1"] = inst.eps1;
    j["eps2"] = inst.eps2;
    json players = json::array();
    for (const auto& p : inst.players) {
        json pj;
        pj["b"] = p.b;
        pj["delta"] = p.delta;
        pj["K"] = p.bigK;
        pj["Xi"] = matrix_to_json(p.xi);
        pj["zeta"] = p.zeta;
        pj["beta"] = p.beta;
        pj["a"] = p.anchor;
        players.push_back(std::move(pj));
    }
    j["players"] = players;
    if (!inst.anchors_projected.empty()) j["anchors_projected"] = inst.anchors_projected;
    return j.dump(2);
}

Result<CournotInstance> instance_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) return Fail::InvalidInput;
    CournotInstance inst;
    try {
        inst.n = j.at("n").get<int>();
        inst.m = j.at("m").get<int>();
        inst.elasticity = j.at("elasticity").get<Vector>();
        inst.eps1 = j.at("eps1").get<double>();
        inst.eps2 = j.at("eps2").get<double>();
        if (j.contains("anchors_projected")) inst.anchors_projected = j["anchors_projected"].get<std::vector<int>>();
        for (const auto& pj : j.at("players")) {
            PlayerData p;
            p.b = pj.at("b").get<Vector>();
            p.delta = pj.at("delta").get<Vector>();
            p.bigK = pj.at("K").get<Vector>();
            auto xi = matrix_from_json(pj.at("Xi"), inst.m);
            if (!xi) return xi.error();
            p.xi = std::move(*xi);
            p.zeta = pj.at("zeta").get<Vector>();
            p.beta = pj.at("beta").get<Vector>();
            p.anchor = pj.at("a").get<Vector>();
            inst.players.push_back(std::move(p));
        }
    } catch (const json::exception&) {
        return Fail::InvalidInput;
    }
    if (inst.validate() != Fail::None) return Fail::InvalidInput;
    return inst;
}

}  // namespace scd::cournot
