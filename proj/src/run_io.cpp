#include "proxal/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "proxal/errors.hpp"

namespace proxal {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string run_to_csv(const RunRecord& record) {
  std::string out =
      "k,stat_norm,feas_norm,dx_norm,dlambda_norm,P_k,inner_iters,hvp_count,"
      "eps_g_k,eps_H_k,r_tilde_norm\n";
  for (const IterationRow& row : record.rows) {
    out += std::to_string(row.k);
    out += ',' + format_double(row.stat_norm);
    out += ',' + format_double(row.feas_norm);
    out += ',' + format_double(row.dx_norm);
    out += ',' + format_double(row.dlambda_norm);
    out += ',' + format_double(row.lyapunov);
    out += ',' + std::to_string(row.inner_iters);
    out += ',' + std::to_string(row.hvp_count);
    out += ',' + format_double(row.eps_g_k);
    out += ',' + format_double(row.eps_H_k);
    out += ',' + format_double(row.r_tilde_norm);
    out += '\n';
  }
  return out;
}

json run_to_json(const RunRecord& record, const json& config_echo,
                 std::uint64_t seed) {
  json j;
  j["status"] = to_string(record.status);
  if (record.stop_index)
    j["stop_index"] = *record.stop_index;
  else
    j["stop_index"] = nullptr;
  j["totals"] = {
      {"outer_iterations", record.rows.size()},
      {"inner_iterations", record.total_inner_iters()},
      {"hvp_products", record.total_hvps()},
  };
  j["wall_time_s"] = record.wall_time_s;
  j["rho"] = record.rho;
  j["beta"] = record.beta;
  j["x_final"] = std::vector<double>(record.x_final.begin(),
                                     record.x_final.end());
  j["lambda_final"] = std::vector<double>(record.lambda_final.begin(),
                                          record.lambda_final.end());
  j["config"] = config_echo;
  j["seed"] = seed;
  return j;
}

json certificate_to_json(const Certificate& cert) {
  json j;
  j["lambda"] = std::vector<double>(cert.lambda_used.begin(),
                                    cert.lambda_used.end());
  j["stat_norm"] = cert.stat_norm;
  j["feas_norm"] = cert.feas_norm;
  j["epsilon"] = cert.epsilon;
  j["is_1o"] = cert.is_1o;
  if (cert.reduced_min_eig) {
    j["is_2o"] = cert.is_2o;
    j["reduced_min_eig"] = std::isinf(*cert.reduced_min_eig)
                               ? json("inf")
                               : json(*cert.reduced_min_eig);
    j["null_space_dim"] = cert.null_space_dim;
    j["sigma_min"] = cert.sigma_min;
    j["sigma_max"] = cert.sigma_max;
    j["rank_tolerance"] = cert.rank_tolerance;
  } else {
    j["is_2o"] = nullptr;
    j["reduced_min_eig"] = nullptr;
  }
  return j;
}

void persist_run(const RunRecord& record, const json& config_echo,
                 std::uint64_t seed, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir))
    throw EvaluationError("cannot create output directory '" +
                          out_dir.string() + "': " + ec.message());

  const auto write_file = [](const std::filesystem::path& path,
                             const std::string& content) {
    std::ofstream stream(path, std::ios::binary | std::ios::trunc);
    if (!stream) throw EvaluationError("cannot open '" + path.string() + "'");
    stream << content;
    if (!stream) throw EvaluationError("write failed for '" + path.string() + "'");
  };

  write_file(out_dir / "run.csv", run_to_csv(record));
  write_file(out_dir / "run.json",
             run_to_json(record, config_echo, seed).dump(2) + "\n");
}

}  // namespace proxal
