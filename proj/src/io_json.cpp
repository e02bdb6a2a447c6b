#include "hetlink/io_json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hetlink/common.hpp"

#ifndef HETLINK_SCHEMA_DIR
#define HETLINK_SCHEMA_DIR "schemas"
#endif

namespace hetlink {

namespace {

// Collects violations across every config section before throwing, so one
// failed load reports all bad fields at once.
struct FieldErrors {
  std::vector<std::string> errors;

  void add(const std::string& field, const std::string& why) {
    errors.push_back(field + ": " + why);
  }

  void raise_if_any() const {
    if (errors.empty()) return;
    std::string msg = "config validation failed:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw InputError(msg);
  }
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  spec.encoder = parse_encoder(get_or<std::string>(j, "encoder", "nognn"));
  spec.decoder = parse_decoder(get_or<std::string>(j, "decoder", "distmult"));
  spec.layers = get_or<int>(j, "layers", 2);
  spec.hidden = get_or<int>(j, "hidden", 256);
  spec.powers = get_or<int>(j, "powers", 2);
  spec.embed_dim = get_or<int>(j, "embed_dim", 0);
  spec.decoder_hidden = get_or<int>(j, "decoder_hidden", 0);
  return spec;
}

json model_spec_to_json(const ModelSpec& spec) {
  return json{{"encoder", encoder_name(spec.encoder)}, {"decoder", decoder_name(spec.decoder)},
              {"layers", spec.layers},                 {"hidden", spec.hidden},
              {"powers", spec.powers},                 {"embed_dim", spec.embed_dim},
              {"decoder_hidden", spec.decoder_hidden}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.loss = parse_loss(get_or<std::string>(j, "loss", "logistic"));
  cfg.epochs = get_or<int>(j, "epochs", 200);
  cfg.learning_rate = get_or<double>(j, "learning_rate", 1e-3);
  cfg.optimizer = parse_optimizer(get_or<std::string>(j, "optimizer", "adam"));
  cfg.beta1 = get_or<double>(j, "beta1", 0.9);
  cfg.beta2 = get_or<double>(j, "beta2", 0.999);
  cfg.adam_eps = get_or<double>(j, "adam_eps", 1e-8);
  cfg.k_neg = get_or<int>(j, "k_neg", 1);
  cfg.l2_weight = get_or<double>(j, "l2_weight", 0.0);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  cfg.eval_every = get_or<int>(j, "eval_every", 10);
  cfg.val_n_neg = get_or<int>(j, "val_n_neg", 50);
  cfg.val_max_positives = get_or<int>(j, "val_max_positives", 1000);
  cfg.stop_below_loss = get_or<double>(j, "stop_below_loss", -1.0);
  return cfg;
}

EvalConfig eval_config_from_json(const json& j) {
  EvalConfig cfg;
  cfg.metric = parse_metric(get_or<std::string>(j, "metric", "mrr"));
  cfg.n_neg = get_or<int>(j, "n_neg", 1000);
  cfg.hits_k = get_or<int>(j, "hits_k", 50);
  cfg.shared_neg_size = get_or<int>(j, "shared_neg_size", 1000);
  cfg.deg_buckets = get_or<int>(j, "deg_buckets", 3);
  cfg.sim_buckets = get_or<int>(j, "sim_buckets", 3);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 7);
  cfg.corrupt_both = get_or<bool>(j, "corrupt_both", false);
  return cfg;
}

RunConfig parse_run_config(const json& j) {
  FieldErrors errs;
  RunConfig cfg;

  if (!j.contains("data") || !j.at("data").is_object()) {
    errs.add("data", "missing section");
  } else {
    const json& d = j.at("data");
    cfg.data.graph_path = get_or<std::string>(d, "graph", "");
    cfg.data.features_path = get_or<std::string>(d, "features", "");
    if (cfg.data.graph_path.empty()) errs.add("data.graph", "required");
    if (cfg.data.features_path.empty()) errs.add("data.features", "required");
    if (d.contains("split_ratio")) {
      auto r = d.at("split_ratio").get<std::vector<double>>();
      if (r.size() != 3)
        errs.add("data.split_ratio", "must have 3 components");
      else
        cfg.data.split_ratio = {r[0], r[1], r[2]};
    }
    cfg.data.split_seed = get_or<std::uint64_t>(d, "split_seed", 17);
    double sum = cfg.data.split_ratio[0] + cfg.data.split_ratio[1] + cfg.data.split_ratio[2];
    for (double r : cfg.data.split_ratio)
      if (r < 0.0) errs.add("data.split_ratio", "negative component");
    if (std::abs(sum - 1.0) > 1e-9) errs.add("data.split_ratio", "components must sum to 1");
  }

  try {
    cfg.model = model_spec_from_json(j.contains("model") ? j.at("model") : json::object());
  } catch (const std::exception& e) {
    errs.add("model", e.what());
  }
  try {
    cfg.train = train_config_from_json(j.contains("train") ? j.at("train") : json::object());
    cfg.train.validate();
  } catch (const std::exception& e) {
    errs.add("train", e.what());
  }
  try {
    cfg.eval = eval_config_from_json(j.contains("eval") ? j.at("eval") : json::object());
    cfg.eval.validate();
  } catch (const std::exception& e) {
    errs.add("eval", e.what());
  }

  cfg.out_dir = get_or<std::string>(j, "out_dir", "");
  if (cfg.out_dir.empty()) errs.add("out_dir", "required");
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) errs.add("seeds", "must be non-empty");
  }

  errs.raise_if_any();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_json_file(path));
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["data"] = {{"graph", cfg.data.graph_path},
               {"features", cfg.data.features_path},
               {"split_ratio", cfg.data.split_ratio},
               {"split_seed", cfg.data.split_seed}};
  j["model"] = model_spec_to_json(cfg.model);
  j["train"] = {{"loss", cfg.train.loss == LossKind::Hinge ? "hinge" : "logistic"},
                {"epochs", cfg.train.epochs},
                {"learning_rate", cfg.train.learning_rate},
                {"optimizer", cfg.train.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
                {"k_neg", cfg.train.k_neg},
                {"l2_weight", cfg.train.l2_weight},
                {"seed", cfg.train.seed},
                {"eval_every", cfg.train.eval_every}};
  j["eval"] = {{"metric", cfg.eval.metric == MetricKind::MRR ? "mrr" : "hits"},
               {"n_neg", cfg.eval.n_neg},
               {"hits_k", cfg.eval.hits_k},
               {"shared_neg_size", cfg.eval.shared_neg_size},
               {"deg_buckets", cfg.eval.deg_buckets},
               {"sim_buckets", cfg.eval.sim_buckets},
               {"seed", cfg.eval.seed},
               {"corrupt_both", cfg.eval.corrupt_both}};
  j["out_dir"] = cfg.out_dir;
  j["seeds"] = cfg.seeds;
  return j;
}

json eval_report_to_json(const EvalReport& rep) {
  json j;
  j["metric"] = rep.metric;
  j["overall"] = rep.overall;
  j["buckets"] = {{"n_deg", rep.n_deg},
                  {"n_sim", rep.n_sim},
                  {"value", rep.bucket_value},
                  {"count", rep.bucket_count},
                  {"deg_boundaries", rep.deg_boundaries},
                  {"sim_boundaries", rep.sim_boundaries}};
  j["metadata"] = {{"model", rep.model},
                   {"seed", rep.seed},
                   {"data_checksum", rep.data_checksum},
                   {"warnings", rep.warnings}};
  return j;
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport rep;
  rep.metric = j.at("metric").get<std::string>();
  rep.overall = j.at("overall").get<double>();
  const json& b = j.at("buckets");
  rep.n_deg = b.at("n_deg").get<int>();
  rep.n_sim = b.at("n_sim").get<int>();
  rep.bucket_value = b.at("value").get<std::vector<double>>();
  rep.bucket_count = b.at("count").get<std::vector<std::size_t>>();
  rep.deg_boundaries = b.at("deg_boundaries").get<std::vector<double>>();
  rep.sim_boundaries = b.at("sim_boundaries").get<std::vector<double>>();
  const json& m = j.at("metadata");
  rep.model = m.at("model").get<std::string>();
  rep.seed = m.at("seed").get<std::uint64_t>();
  rep.data_checksum = m.at("data_checksum").get<std::string>();
  rep.warnings = m.at("warnings").get<std::vector<std::string>>();
  return rep;
}

json train_trace_to_json(const TrainTrace& trace) {
  json j;
  j["epoch_loss"] = trace.epoch_loss;
  json vals = json::array();
  for (const auto& [epoch, v] : trace.val_mrr) vals.push_back({{"epoch", epoch}, {"mrr", v}});
  j["val_mrr"] = vals;
  j["best_epoch"] = trace.best_epoch;
  j["best_val_mrr"] = trace.best_val_mrr;
  j["wall_seconds"] = trace.wall_seconds;
  j["final_checksum"] = checksum_hex(trace.final_checksum);
  return j;
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("write_trace_csv: cannot open " + path);
  out << "epoch,loss,val_mrr\n";
  out.precision(12);
  std::size_t vi = 0;
  for (std::size_t e = 0; e < trace.epoch_loss.size(); ++e) {
    out << (e + 1) << "," << trace.epoch_loss[e] << ",";
    if (vi < trace.val_mrr.size() && trace.val_mrr[vi].first == static_cast<int>(e + 1)) {
      out << trace.val_mrr[vi].second;
      ++vi;
    }
    out << "\n";
  }
}

namespace {

void validate_node(const json& doc, const json& schema, const std::string& path,
                   std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const std::string type = schema.at("type").get<std::string>();
    bool ok = true;
    if (type == "object")
      ok = doc.is_object();
    else if (type == "array")
      ok = doc.is_array();
    else if (type == "string")
      ok = doc.is_string();
    else if (type == "number")
      ok = doc.is_number();
    else if (type == "integer")
      ok = doc.is_number_integer() || doc.is_number_unsigned();
    else if (type == "boolean")
      ok = doc.is_boolean();
    else if (type == "null")
      ok = doc.is_null();
    if (!ok) {
      errors.push_back(path + ": expected " + type);
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& v : schema.at("enum"))
      if (v == doc) found = true;
    if (!found) errors.push_back(path + ": value not in enum");
  }
  if (doc.is_number()) {
    if (schema.contains("minimum") && doc.get<double>() < schema.at("minimum").get<double>())
      errors.push_back(path + ": below minimum");
    if (schema.contains("maximum") && doc.get<double>() > schema.at("maximum").get<double>())
      errors.push_back(path + ": above maximum");
  }
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& req : schema.at("required"))
        if (!doc.contains(req.get<std::string>()))
          errors.push_back(path + ": missing required key " + req.get<std::string>());
    if (schema.contains("properties"))
      for (auto it = schema.at("properties").begin(); it != schema.at("properties").end(); ++it)
        if (doc.contains(it.key())) validate_node(doc.at(it.key()), it.value(), path + "/" + it.key(), errors);
  }
  if (doc.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const auto& el : doc) validate_node(el, schema.at("items"), path + "/" + std::to_string(i++), errors);
  }
}

}  // namespace

std::vector<std::string> validate_against_schema(const json& doc, const json& schema) {
  std::vector<std::string> errors;
  validate_node(doc, schema, "$", errors);
  return errors;
}

std::string schema_dir() {
  if (const char* env = std::getenv("HETLINK_SCHEMA_DIR")) return env;
  return HETLINK_SCHEMA_DIR;
}

void require_schema_valid(const json& doc, const std::string& schema_name) {
  const json schema = read_json_file(schema_dir() + "/" + schema_name);
  auto errors = validate_against_schema(doc, schema);
  if (!errors.empty()) {
    std::string msg = "document violates schema " + schema_name + ":";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw InputError(msg);
  }
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("write_json_file: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw InputError("write_json_file: write failed for " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("read_json_file: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("read_json_file: " + path + ": " + e.what());
  }
  return j;
}

json error_json(const std::string& type, const std::string& message) {
  return json{{"error", {{"type", type}, {"message", message}}}};
}

std::string checksum_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hetlink
