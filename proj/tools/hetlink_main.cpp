#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hetlink/commands.hpp"
#include "hetlink/common.hpp"

using namespace hetlink;

namespace {

// Failures print one machine-readable error object to stdout and exit
// nonzero.
int fail(const std::string& type, const std::string& message) {
  std::cout << error_json(type, message).dump(2) << std::endl;
  return 1;
}

RunConfig load_config_with_overrides(const std::string& config_path, const std::string& out_override,
                                     std::uint64_t seed_override, bool have_seed) {
  RunConfig cfg = load_run_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (have_seed) cfg.train.seed = seed_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap_from_env();

  CLI::App app{"hetlink: link prediction under feature heterophily"};
  app.require_subcommand(1);

  // synthgen
  SynthgenArgs sg;
  auto* c_sg = app.add_subcommand("synthgen", "generate a similarity-quantile synthetic graph");
  c_sg->add_option("--n", sg.n, "number of nodes");
  c_sg->add_option("--features", sg.features, "gaussian:<dim>:<seed> or feature file");
  c_sg->add_option("--quantiles", sg.n_quantiles, "number of similarity quantiles");
  c_sg->add_option("--index", sg.index, "quantile index to wire");
  c_sg->add_option("--subsample-rate", sg.edge_subsample_rate, "Bernoulli keep-rate within the quantile");
  c_sg->add_option("--seed", sg.seed, "subsampling seed");
  c_sg->add_option("--pair-budget", sg.pair_budget, "max node pairs for the O(n^2) pass");
  c_sg->add_option("--out-prefix", sg.out_prefix, "output prefix")->required();

  // simstats
  SimstatsArgs ss;
  auto* c_ss = app.add_subcommand("simstats", "similarity profile and task classification");
  c_ss->add_option("--graph", ss.graph_path)->required();
  c_ss->add_option("--features", ss.features_path)->required();
  c_ss->add_option("--neg-samples", ss.n_neg_samples);
  c_ss->add_option("--seed", ss.seed);
  c_ss->add_option("--epsilon", ss.epsilon);
  c_ss->add_option("--out", ss.out_dir)->required();

  // train / eval / buckets / heuristic share --config
  std::string config_path, out_dir, checkpoint, method, diff_a, diff_b;
  std::uint64_t seed = 0;
  bool have_seed = false;

  auto* c_tr = app.add_subcommand("train", "train a model per the run config");
  c_tr->add_option("--config", config_path)->required();
  c_tr->add_option("--out", out_dir);
  c_tr->add_option("--seed", seed)->each([&](const std::string&) { have_seed = true; });

  auto* c_ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  c_ev->add_option("--config", config_path)->required();
  c_ev->add_option("--checkpoint", checkpoint)->required();
  c_ev->add_option("--out", out_dir);

  auto* c_bk = app.add_subcommand("buckets", "bucketized evaluation (or --diff of two reports)");
  c_bk->add_option("--config", config_path);
  c_bk->add_option("--checkpoint", checkpoint);
  c_bk->add_option("--diff-a", diff_a, "report.json to diff (left)");
  c_bk->add_option("--diff-b", diff_b, "report.json to diff (right)");
  c_bk->add_option("--out", out_dir);

  auto* c_he = app.add_subcommand("heuristic", "heuristic baseline evaluation");
  c_he->add_option("--config", config_path)->required();
  c_he->add_option("--method", method, "cn|aa|ra|ppr")->required();
  c_he->add_option("--out", out_dir);

  VerifyArgs va;
  auto* c_vf = app.add_subcommand("verify", "numerical verification of the three theorems");
  c_vf->add_option("--theorem", va.theorem, "1, 2 or 3")->required();
  c_vf->add_option("--out", va.out_dir)->required();
  c_vf->add_option("--seed", va.seed);
  c_vf->add_option("--n", va.n_nodes);
  c_vf->add_option("--M", va.M);
  c_vf->add_option("--M1", va.M1);
  c_vf->add_option("--M2", va.M2);

  auto* c_sw = app.add_subcommand("sweep", "similarity-spectrum experiment matrix");
  c_sw->add_option("--config", config_path)->required();
  c_sw->add_option("--out", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_sg->parsed()) {
      cmd_synthgen(sg);
    } else if (c_ss->parsed()) {
      cmd_simstats(ss);
    } else if (c_tr->parsed()) {
      cmd_train(load_config_with_overrides(config_path, out_dir, seed, have_seed));
    } else if (c_ev->parsed()) {
      cmd_eval(load_config_with_overrides(config_path, out_dir, 0, false), checkpoint);
    } else if (c_bk->parsed()) {
      if (!diff_a.empty() || !diff_b.empty()) {
        if (diff_a.empty() || diff_b.empty() || out_dir.empty())
          return fail("input", "buckets --diff needs --diff-a, --diff-b and --out");
        cmd_buckets_diff(diff_a, diff_b, out_dir + "/diff.csv");
      } else {
        if (config_path.empty() || checkpoint.empty())
          return fail("input", "buckets needs --config and --checkpoint (or --diff-a/--diff-b)");
        cmd_buckets(load_config_with_overrides(config_path, out_dir, 0, false), checkpoint);
      }
    } else if (c_he->parsed()) {
      cmd_heuristic(load_config_with_overrides(config_path, out_dir, 0, false),
                    parse_heuristic(method));
    } else if (c_vf->parsed()) {
      if (!cmd_verify(va)) return fail("verification", "one or more theorem assertions failed");
    } else if (c_sw->parsed()) {
      json j = read_json_file(config_path);
      SweepConfig cfg = parse_sweep_config(j);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      cmd_sweep(cfg);
    }
  } catch (const InputError& e) {
    return fail("input", e.what());
  } catch (const DomainError& e) {
    return fail("domain", e.what());
  } catch (const ResourceError& e) {
    return fail("resource", e.what());
  } catch (const NumericError& e) {
    return fail("numeric", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
