#include "featnet/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace featnet {

using nlohmann::json;

namespace {

std::string real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& s) {
    if (s == "nan") return kNotApplicable;
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number \"" + s + "\"");
    return v;
}

json real_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

std::string trace_csv(const RunTrace& t) {
    std::ostringstream out;
    out << kTraceMagic << '\n' << "# config=" << t.config.dump() << '\n' << kTraceHeader << '\n';
    for (const auto& r : t.records) {
        out << r.iter << ',' << real(r.risk) << ',' << real(r.excess_risk) << ',' << real(r.msd) << ','
            << real(r.comm_net) << ',' << real(r.comm_gross) << ',' << r.gradient_evals << ','
            << r.combination_ops << ',' << real(r.unbiasedness) << ',' << real(r.grad_sum_drift) << ','
            << r.collisions << '\n';
    }
    return out.str();
}

void write_trace_csv(const std::string& path, const RunTrace& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << trace_csv(t);
    if (!out) throw std::runtime_error("write failed: " + path);
}

RunTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceMagic) throw std::runtime_error(path + ": not a featnet trace");
    RunTrace t;
    if (!std::getline(in, line) || line.rfind("# config=", 0) != 0) {
        throw std::runtime_error(path + ": missing config line");
    }
    t.config = json::parse(line.substr(9));
    if (!std::getline(in, line) || line != kTraceHeader) throw std::runtime_error(path + ": unexpected header");
    std::size_t lineno = 3;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 11) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 11 columns");
        }
        try {
            TraceRecord r;
            r.iter = std::stoull(cells[0]);
            r.risk = parse_real(cells[1]);
            r.excess_risk = parse_real(cells[2]);
            r.msd = parse_real(cells[3]);
            r.comm_net = parse_real(cells[4]);
            r.comm_gross = parse_real(cells[5]);
            r.gradient_evals = std::stoull(cells[6]);
            r.combination_ops = std::stoull(cells[7]);
            r.unbiasedness = parse_real(cells[8]);
            r.grad_sum_drift = parse_real(cells[9]);
            r.collisions = std::stoull(cells[10]);
            t.records.push_back(r);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (t.config.contains("algorithm")) {
        const auto& a = t.config["algorithm"];
        t.algorithm = algorithm_from_string(a.value("name", "vrd2"));
        t.iterations = a.value("iters", std::size_t{0});
        t.seed = a.value("seed", std::uint64_t{0});
        if (t.algorithm == Algorithm::pvrd2) {
            t.J = a.value("J", std::size_t{1});
            t.B = a.value("B", std::size_t{1});
        }
    }
    if (t.config.contains("metrics")) t.record_every = t.config["metrics"].value("every", std::size_t{1});
    t.tracks_unbiasedness = t.algorithm == Algorithm::vrd2 || t.algorithm == Algorithm::pvrd2;
    t.tracks_grad_sum = t.tracks_unbiasedness || t.algorithm == Algorithm::saga ||
                        t.algorithm == Algorithm::model_distributed;
    // Per-iteration rates are implied by the first nonzero record.
    for (const auto& r : t.records) {
        if (r.iter == 0) continue;
        const auto it = static_cast<double>(r.iter);
        t.comm_per_iter = {r.comm_net / it, r.comm_gross / it};
        t.gradient_evals_per_iter = r.gradient_evals / r.iter;
        t.combination_ops_per_iter = r.combination_ops / r.iter;
        break;
    }
    return t;
}

json invariant_report_json(const InvariantReport& report) {
    json out = json::array();
    for (const auto& c : report.checks) {
        json j{{"name", c.name}, {"status", to_string(c.status)}, {"limit", c.limit}};
        if (c.status != CheckStatus::not_applicable) {
            j["worst"] = c.worst;
            j["worst_iter"] = c.worst_iter;
        }
        j["first_violation"] = c.first_violation ? json(*c.first_violation) : json(nullptr);
        if (!c.detail.empty()) j["detail"] = c.detail;
        out.push_back(j);
    }
    return out;
}

json summary_json(const RunTrace& t, const InvariantReport& report) {
    json s;
    s["schema_version"] = 1;
    s["algorithm"] = to_string(t.algorithm);
    s["step_size"] = t.step_size;
    s["J"] = t.J;
    s["B"] = t.B;
    s["K"] = t.K;
    s["N"] = t.N;
    s["M"] = t.M;
    s["C"] = t.C;
    s["seed"] = t.seed;
    s["iterations"] = t.iterations;
    s["comm_per_edge_per_iter"] = {{"net", t.comm_per_iter.net}, {"gross", t.comm_per_iter.gross}};
    if (!t.records.empty()) {
        const auto& r = t.records.back();
        s["final"] = {{"iter", r.iter},
                      {"risk", real_or_null(r.risk)},
                      {"excess_risk", real_or_null(r.excess_risk)},
                      {"msd", real_or_null(r.msd)},
                      {"comm_net", r.comm_net},
                      {"comm_gross", r.comm_gross},
                      {"gradient_evals", r.gradient_evals},
                      {"combination_ops", r.combination_ops},
                      {"collisions", r.collisions}};
    }
    s["invariants"] = invariant_report_json(report);
    s["invariants_passed"] = report.passed();
    s["warnings"] = t.warnings;
    s["config"] = t.config;
    return s;
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace featnet
