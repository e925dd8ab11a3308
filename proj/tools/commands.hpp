#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "nhsta/dynamics.hpp"

namespace nhsta::cli {

struct Context {
    RunConfig cfg;
    std::filesystem::path out;
    int jobs = 1;
    std::uint64_t seed = 1;
    json summary = json::object();
    std::vector<std::string> outputs;

    std::filesystem::path file(const std::string& name);
    IntegratorOptions integrator() const;
};

void cmd_spectrum(Context& c);
void cmd_contour(Context& c);
void cmd_simulate(Context& c);
void cmd_correct(Context& c, ProtocolKind kind);
void cmd_validity_map(Context& c);
void cmd_robustness(Context& c);
void cmd_optimize_radd(Context& c);
void cmd_encircle_check(Context& c);
void cmd_map_optomech(Context& c);
void cmd_emit_plot(Context& c, const std::filesystem::path& input, const std::string& kind, const std::string& title);

}  // namespace nhsta::cli
