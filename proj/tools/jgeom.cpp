// jgeom: Jordan spectra, constant-angle checks and identity verification.
//
// Exit codes: 0 success, 1 a check came out false, 2 bad input.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jgeom/cli.hpp"

namespace {

using namespace jgeom;
using namespace jgeom::cli;

int emit(const ReportDocument& doc, const std::string& format, int code) {
  std::cout << render(doc, parse_format(format));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jordan angles and extrinsic geometry of constant-angle submanifolds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string format = "json";
  const auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv", "md"}));
  };

  auto* jordan = app.add_subcommand("jordan", "Jordan spectrum of P relative to Q");
  std::string p_file, q_file;
  double cluster_tol = kExactClusterTol;
  jordan->add_option("--p", p_file, "subspace JSON file")->required();
  jordan->add_option("--q", q_file, "subspace JSON file")->required();
  jordan->add_option("--cluster-tol", cluster_tol, "angle clustering tolerance");
  add_format(jordan);

  std::string model;
  std::vector<std::string> params;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  auto* cja = app.add_subcommand("cja", "decide whether a model has constant Jordan angles");
  double angle_tol = 1e-6;
  cja->add_option("--model", model, "model name (see `models list`)")->required();
  cja->add_option("--param", params, "model parameter name=value");
  cja->add_option("--samples", samples, "sample count")->required();
  cja->add_option("--seed", seed, "random seed")->required();
  cja->add_option("--angle-tol", angle_tol, "allowed angle deviation");
  add_format(cja);

  auto* verify = app.add_subcommand("verify", "evaluate identities at seeded samples");
  std::string identities;
  verify->add_option("--model", model, "model name")->required();
  verify->add_option("--param", params, "model parameter name=value");
  verify->add_option("--identities", identities, "comma-separated ids or all")->required();
  verify->add_option("--samples", samples, "sample count")->required();
  verify->add_option("--seed", seed, "random seed")->required();
  add_format(verify);

  auto* models = app.add_subcommand("models", "model catalogue");
  auto* models_list = models->add_subcommand("list", "list built-in models");
  models->require_subcommand(1);
  add_format(models_list);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*jordan) {
      const Outcome o = cmd_jordan(p_file, q_file, cluster_tol);
      return emit(o.doc, format, o.exit_code);
    }
    if (*cja) {
      const Outcome o = cmd_cja(model_from_cli(model, params), samples, seed, angle_tol);
      return emit(o.doc, format, o.exit_code);
    }
    if (*verify) {
      const ModelSpec spec = model_from_cli(model, params);
      const Outcome o = cmd_verify(spec, parse_identities(identities), samples, seed);
      return emit(o.doc, format, o.exit_code);
    }
    if (*models_list) return emit(cmd_models_list(), format, 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
