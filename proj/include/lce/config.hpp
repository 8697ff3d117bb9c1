#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lce/base.hpp"

namespace lce {

// Global parameters. The asymptotic kappa/lambda families have no concrete
// constants; they live here as named knobs that every module reads. Tests and
// the CLI may override any of them via key=value config files.
struct Params {
  // tradeoff / approximation knobs
  double eps = 0.25;
  double delta_flow = 0.5;   // delta for the internal length-constrained MWU
  double delta_app = 0.01;   // delta for the multicommodity-flow application

  // graph bounds
  Length max_len_input = Length(1) << 20;
  Length max_len_internal = Length(1) << 50;

  // neighborhood covers
  int nc_beta = 2;            // ball-carving growth exponent (basic cover)
  int nc_sep_scale = 100;     // h' = 100*h in the separated construction
  int nc_diam_const = 4;      // D_NC: basic cover diameter <= D_NC*beta*h
  int nc_width_const = 8;     // W_NC: basic cover width <= W_NC*beta*n^(1/beta)

  // local flows / cutmatch
  double mwu_iter_const = 8.0;  // constant in the per-phase iteration budget
  double k_mwu = 40.0;          // |w| <= k_mwu*(ln n/delta)*val(f) + |w_init|
  double k_cm = 8.0;            // |C_CM| <= k_cm*phi*h*|A_src|
  int cutmatch_x = 4;           // source scaling in the last cutmatch round
  double kappa_sigma = double(1 << 20);  // distortion shrink
  bool cutmatch_log_div = false;         // divide phi by ln^2 n as in the paper

  // routers
  int router_b = 3;
  int router_prune_denom = 100;  // threshold |B| / (denom * t_local)

  // certified-ED schedules
  int t_batches = 2;         // online-batch horizon per instance
  int ed_h_budget = 18;      // provisioned /3 shrink steps: h0 = h*3^budget
  double phi_init = 0.125;
  double phi_insert = 0.25;
  double phi_delete = 0.125;
  int insert_lm_cap = 4;     // landmark-closure iteration cap
  int mu_factor = 2;         // mu = mu_factor * t_batches

  // sparsifier / hierarchy / emulator
  double alpha_up_cap = 64.0;   // regression bound for the star-union stretch
  int lambda_hup = 64;          // provision multiplier h_{k+1} = lambda*hbar_k
  int lambda_k = 4;             // max hierarchy levels
  int lambda_x = 4;             // max stacking levels
  int stacking_h = 0;           // 0 = default max(4, ceil(n^eps))

  // fully dynamic wrapper
  int xi = 2;

  // replay harness
  int audit_every = 0;  // 0 = audits only at the end
  std::uint64_t seed = 1;

  int ed_t_local() const { return 4 * t_batches + 4 * insert_lm_cap + 8; }
  int mu() const { return mu_factor * t_batches; }
  Length h_provision(Length h_target) const {
    Length h0 = h_target;
    for (int i = 0; i < ed_h_budget; ++i) h0 = sat_mul(h0, 3);
    return h0;
  }
  Length default_stacking_h(std::size_t n) const {
    if (stacking_h > 0) return stacking_h;
    double v = std::pow(double(n == 0 ? 1 : n), eps);
    Length h = Length(std::ceil(v));
    return h < 4 ? 4 : h;
  }

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
};

inline void Params::set(const std::string& key, const std::string& value) {
  auto d = [&] { return std::stod(value); };
  auto i = [&] { return std::stoi(value); };
  auto l = [&] { return Length(std::stoll(value)); };
  if (key == "eps") eps = d();
  else if (key == "delta_flow") delta_flow = d();
  else if (key == "delta_app") delta_app = d();
  else if (key == "max_len_input") max_len_input = l();
  else if (key == "nc_beta") nc_beta = i();
  else if (key == "nc_sep_scale") nc_sep_scale = i();
  else if (key == "nc_diam_const") nc_diam_const = i();
  else if (key == "nc_width_const") nc_width_const = i();
  else if (key == "mwu_iter_const") mwu_iter_const = d();
  else if (key == "k_mwu") k_mwu = d();
  else if (key == "k_cm") k_cm = d();
  else if (key == "cutmatch_x") cutmatch_x = i();
  else if (key == "kappa_sigma") kappa_sigma = d();
  else if (key == "cutmatch_log_div") cutmatch_log_div = i() != 0;
  else if (key == "router_b") router_b = i();
  else if (key == "router_prune_denom") router_prune_denom = i();
  else if (key == "t_batches") t_batches = i();
  else if (key == "ed_h_budget") ed_h_budget = i();
  else if (key == "phi_init") phi_init = d();
  else if (key == "phi_insert") phi_insert = d();
  else if (key == "phi_delete") phi_delete = d();
  else if (key == "insert_lm_cap") insert_lm_cap = i();
  else if (key == "mu_factor") mu_factor = i();
  else if (key == "alpha_up_cap") alpha_up_cap = d();
  else if (key == "lambda_hup") lambda_hup = i();
  else if (key == "lambda_k") lambda_k = i();
  else if (key == "lambda_x") lambda_x = i();
  else if (key == "stacking_h") stacking_h = i();
  else if (key == "xi") xi = i();
  else if (key == "audit_every") audit_every = i();
  else if (key == "seed") seed = std::stoull(value);
  else fail("UnknownConfigKey", key);
}

inline void Params::load_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "ConfigFileError", "cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string trimmed;
    for (char c : line)
      if (!isspace(static_cast<unsigned char>(c))) trimmed += c;
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    require(eq != std::string::npos, "ConfigParseError", line);
    set(trimmed.substr(0, eq), trimmed.substr(eq + 1));
  }
}

}  // namespace lce
