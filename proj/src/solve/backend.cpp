#include "solve/backend.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fcas {

namespace {

SolveStatus status_from_token(const std::string& t) {
    if (t == "optimal") return SolveStatus::Optimal;
    if (t == "gap_limit") return SolveStatus::GapLimit;
    if (t == "infeasible") return SolveStatus::Infeasible;
    if (t == "unbounded") return SolveStatus::Unbounded;
    if (t == "node_limit") return SolveStatus::NodeLimit;
    if (t == "time_limit") return SolveStatus::TimeLimit;
    if (t == "numerical_trouble") return SolveStatus::NumericalTrouble;
    throw std::runtime_error("backend: unknown status \"" + t + "\"");
}

std::filesystem::path unique_path(const std::string& suffix) {
    static std::atomic<unsigned> counter{0};
    static const unsigned salt = std::random_device{}();
    std::ostringstream name;
    name << "fcas-" << std::hex << salt << "-" << std::dec << counter++ << suffix;
    return std::filesystem::temp_directory_path() / name.str();
}

std::vector<double> read_vector(const nlohmann::ordered_json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

}  // namespace

bool backend_configured() {
    const char* cmd = std::getenv("FCAS_BACKEND");
    return cmd != nullptr && *cmd != '\0';
}

Solution solve_with_backend(const ConicProgram& p, const SolveOptions& opt) {
    const char* cmd = std::getenv("FCAS_BACKEND");
    if (cmd == nullptr || *cmd == '\0') {
        throw std::runtime_error("solve_with_backend: FCAS_BACKEND is not set");
    }

    auto model_path = unique_path("-model.json");
    auto sol_path = unique_path("-solution.json");

    nlohmann::ordered_json model = nlohmann::ordered_json::parse(to_json(p));
    model["options"] = {{"rel_gap", opt.rel_gap},
                        {"abs_gap", opt.abs_gap},
                        {"feastol", opt.feastol},
                        {"int_tol", opt.int_tol},
                        {"time_limit_s", opt.time_limit_s},
                        {"node_limit", opt.node_limit}};
    {
        std::ofstream out(model_path);
        if (!out) {
            throw std::runtime_error("backend: cannot write " + model_path.string());
        }
        out << model.dump(2) << "\n";
    }

    std::string cmdline = std::string(cmd) + " \"" + model_path.string() + "\" \"" +
                          sol_path.string() + "\"";
    int rc = std::system(cmdline.c_str());

    std::error_code ignore;
    auto cleanup = [&] {
        std::filesystem::remove(model_path, ignore);
        std::filesystem::remove(sol_path, ignore);
    };

    if (rc != 0) {
        cleanup();
        throw std::runtime_error("backend exited with status " + std::to_string(rc));
    }

    nlohmann::ordered_json j;
    {
        std::ifstream in(sol_path);
        if (!in) {
            cleanup();
            throw std::runtime_error("backend wrote no solution file");
        }
        try {
            j = nlohmann::ordered_json::parse(in);
        } catch (const std::exception& e) {
            cleanup();
            throw std::runtime_error(std::string("backend: bad solution JSON: ") +
                                     e.what());
        }
    }
    cleanup();

    Solution s;
    if (!j.contains("status")) throw std::runtime_error("backend: missing status");
    s.status = status_from_token(j["status"].get<std::string>());
    s.objective = j.value("objective", std::numeric_limits<double>::quiet_NaN());
    s.best_bound = j.value("best_bound", s.objective);
    if (j.contains("x")) {
        s.x = read_vector(j["x"]);
        if (s.feasible() && static_cast<int>(s.x.size()) != p.n_vars()) {
            throw std::runtime_error("backend: x has " + std::to_string(s.x.size()) +
                                     " entries for " + std::to_string(p.n_vars()) +
                                     " variables");
        }
    } else if (s.feasible()) {
        throw std::runtime_error("backend: feasible status without x");
    }
    if (j.contains("row_duals")) {
        s.has_duals = true;
        s.row_duals = read_vector(j["row_duals"]);
        if (j.contains("lb_duals")) s.lb_duals = read_vector(j["lb_duals"]);
        if (j.contains("ub_duals")) s.ub_duals = read_vector(j["ub_duals"]);
        if (j.contains("cone_duals")) {
            for (const auto& cd : j["cone_duals"]) s.cone_duals.push_back(read_vector(cd));
        }
    }
    return s;
}

}  // namespace fcas
