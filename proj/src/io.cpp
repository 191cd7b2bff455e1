#include "cforge/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_array(std::string& out, const std::vector<double>& v) {
    out += '[';
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt(v[i]);
    }
    out += ']';
}

} // namespace

std::string cocycle_to_json(const CyclicCocycle& c) {
    std::string out = "{\"dim\":" + std::to_string(c.dim()) +
                      ",\"period\":" + std::to_string(c.period()) + ",\"matrices\":[";
    for (int j = 0; j < c.period(); ++j) {
        if (j) out += ',';
        std::vector<double> flat;
        flat.reserve(c.dim() * c.dim());
        for (int r = 0; r < c.dim(); ++r)
            for (int col = 0; col < c.dim(); ++col) flat.push_back(c.map(j)(r, col));
        append_array(out, flat);
    }
    out += "]}";
    return out;
}

CyclicCocycle cocycle_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw argument_error(std::string("cocycle JSON parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("period") ||
        !j.contains("matrices"))
        throw argument_error("cocycle JSON needs dim, period and matrices");
    const int d = j["dim"].get<int>();
    const int n = j["period"].get<int>();
    const auto& ms = j["matrices"];
    if (!ms.is_array() || static_cast<int>(ms.size()) != n)
        throw argument_error("cocycle JSON: matrices count does not match period");
    std::vector<Matrix> maps(n);
    for (int k = 0; k < n; ++k) {
        const auto& flat = ms[k];
        if (!flat.is_array() || static_cast<int>(flat.size()) != d * d)
            throw argument_error("cocycle JSON: matrix " + std::to_string(k) +
                                 " has wrong length");
        Matrix m(d, d);
        for (int r = 0; r < d; ++r)
            for (int col = 0; col < d; ++col) m(r, col) = flat[r * d + col].get<double>();
        maps[k] = m;
    }
    return CyclicCocycle(d, std::move(maps));
}

std::string graph_to_json(const LyapunovGraph& g) {
    std::string out = "{\"dim\":" + std::to_string(g.dim()) + ",\"sigma\":";
    append_array(out, g.sigma);
    out += '}';
    return out;
}

LyapunovGraph graph_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw argument_error(std::string("graph JSON parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("sigma"))
        throw argument_error("graph JSON needs dim and sigma");
    const int d = j["dim"].get<int>();
    std::vector<double> sigma = j["sigma"].get<std::vector<double>>();
    if (static_cast<int>(sigma.size()) != d + 1)
        throw argument_error("graph JSON: sigma length must be dim+1");
    return LyapunovGraph(std::move(sigma));
}

std::string domination_report_to_json(const DominationReport& r) {
    std::string out = "{\"index\":" + std::to_string(r.index) +
                      ",\"ell\":" + std::to_string(r.ell) +
                      ",\"worst_ratio\":" + fmt(r.worst_ratio) +
                      ",\"worst_phase\":" + std::to_string(r.worst_phase) +
                      ",\"dominated\":" + (r.dominated ? "true" : "false");
    if (!r.reason.empty()) out += ",\"reason\":\"" + r.reason + "\"";
    out += '}';
    return out;
}

std::string plan_to_csv(const GraphPathPlan& plan) {
    std::ostringstream out;
    const int d = plan.vertices.front().dim();
    out << "step,moved_index";
    for (int i = 0; i <= d; ++i) out << ",sigma_" << i;
    out << '\n';
    for (size_t v = 0; v < plan.vertices.size(); ++v) {
        out << v << ',' << (v == 0 ? -1 : plan.moved_index[v - 1]);
        for (int i = 0; i <= d; ++i) out << ',' << fmt(plan.vertices[v].sigma[i]);
        out << '\n';
    }
    return out.str();
}

std::string path_to_csv(const PerturbationPath& path) {
    if (path.graphs.size() != path.samples.size())
        throw argument_error("path_to_csv: compute the graphs first");
    std::ostringstream out;
    const int d = path.base.dim();
    out << "sample,max_deviation";
    for (int i = 0; i <= d; ++i) out << ",sigma_" << i;
    out << '\n';
    for (size_t s = 0; s < path.samples.size(); ++s) {
        out << s << ',' << fmt(path.samples[s].deviation(path.base));
        for (int i = 0; i <= d; ++i) out << ',' << fmt(path.graphs[s].sigma[i]);
        out << '\n';
    }
    return out.str();
}

std::string zscores_to_csv(const ZScoreTable& t) {
    std::ostringstream out;
    const int d = static_cast<int>(t.z.front().size());
    out << "phase";
    for (int i = 1; i <= d; ++i) out << ",z_" << i;
    out << ",good\n";
    for (size_t y = 0; y < t.z.size(); ++y) {
        out << y;
        for (int i = 0; i < d; ++i) out << ',' << fmt(t.z[y][i]);
        out << ',' << (static_cast<int>(y) == t.good_phase ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw argument_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw argument_error("cannot write " + path);
    out << content;
}

} // namespace cforge
