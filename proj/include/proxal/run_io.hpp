#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

#include "proxal/certify.hpp"
#include "proxal/run_record.hpp"

namespace proxal {

using json = nlohmann::json;

/// CSV with one row per outer iteration. Header:
///   k,stat_norm,feas_norm,dx_norm,dlambda_norm,P_k,inner_iters,hvp_count,
///   eps_g_k,eps_H_k,r_tilde_norm
/// Formatting is fixed-width-free "%.17g", so identical records produce
/// byte-identical files.
std::string run_to_csv(const RunRecord& record);

/// JSON summary: status, stop_index, the three complexity totals (outer
/// iterations, summed inner iterations, summed Hessian-vector products),
/// the config echo, and the seed.
json run_to_json(const RunRecord& record, const json& config_echo,
                 std::uint64_t seed);

json certificate_to_json(const Certificate& cert);

/// Writes run.csv and run.json under out_dir. Creates the directory.
void persist_run(const RunRecord& record, const json& config_echo,
                 std::uint64_t seed, const std::filesystem::path& out_dir);

/// Deterministic shortest-exact double formatting used by the CSV writer.
std::string format_double(double v);

}  // namespace proxal
