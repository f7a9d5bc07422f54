// anselect: train and evaluate distributional sentence models for answer
// sentence selection, plus the word-count baselines and trec_eval export.

#include "anselect/checkpoint.hpp"
#include "anselect/combiner.hpp"
#include "anselect/corpus.hpp"
#include "anselect/embeddings.hpp"
#include "anselect/manifest.hpp"
#include "anselect/matcher.hpp"
#include "anselect/metrics.hpp"
#include "anselect/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using anselect::BaselineKind;
using anselect::CombinerModel;
using anselect::EmbeddingTable;
using anselect::EvalResult;
using anselect::IdfTable;
using anselect::ModelKind;
using anselect::ModelTheta;
using anselect::QuestionGroup;
using anselect::RankedEntry;
using anselect::RankedList;
using anselect::TrainConfig;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config files: flat `key = value` lines mirroring TrainConfig fields.
// Grid files use the same keys with comma-separated value lists; the grid is
// the Cartesian product.

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    auto strip = [](std::string& s) {
      const char* ws = " \t";
      auto begin = s.find_first_not_of(ws);
      auto end = s.find_last_not_of(ws);
      s = begin == std::string::npos ? "" : s.substr(begin, end - begin + 1);
    };
    strip(trimmed);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    strip(key);
    strip(value);
    if (key.empty() || value.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    entries[key] = value;
  }
  return entries;
}

void apply_config_entry(TrainConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "model") {
    config.model_kind = anselect::model_kind_from_string(value);
  } else if (key == "learning_rate") {
    config.learning_rate = std::stod(value);
  } else if (key == "lambda") {
    config.lambda = std::stod(value);
  } else if (key == "epochs") {
    config.epochs = std::stoi(value);
  } else if (key == "batch_size") {
    config.batch_size = std::stoi(value);
  } else if (key == "seed") {
    config.seed = std::stoull(value);
  } else if (key == "adagrad_epsilon") {
    config.adagrad_epsilon = std::stod(value);
  } else {
    throw std::runtime_error("unknown config key '" + key + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto comma = value.find(',', start);
    std::string part = comma == std::string::npos
                           ? value.substr(start)
                           : value.substr(start, comma - start);
    auto begin = part.find_first_not_of(" \t");
    auto end = part.find_last_not_of(" \t");
    if (begin != std::string::npos) {
      parts.push_back(part.substr(begin, end - begin + 1));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::vector<TrainConfig> grid_from_file(const std::string& path,
                                        const TrainConfig& base) {
  auto entries = parse_kv_file(path);
  std::vector<TrainConfig> grid{base};
  // Fixed key order keeps the grid enumeration deterministic.
  const std::vector<std::string> keys = {
      "model",      "learning_rate", "lambda",         "epochs",
      "batch_size", "seed",          "adagrad_epsilon"};
  for (const auto& key : keys) {
    auto it = entries.find(key);
    if (it == entries.end()) continue;
    auto values = split_list(it->second);
    if (values.empty()) {
      throw std::runtime_error(path + ": empty value list for '" + key + "'");
    }
    std::vector<TrainConfig> expanded;
    expanded.reserve(grid.size() * values.size());
    for (const auto& config : grid) {
      for (const auto& value : values) {
        TrainConfig next = config;
        apply_config_entry(next, key, value);
        expanded.push_back(next);
      }
    }
    grid = std::move(expanded);
    entries.erase(it);
  }
  if (!entries.empty()) {
    throw std::runtime_error(path + ": unknown config key '" +
                             entries.begin()->first + "'");
  }
  return grid;
}

json config_to_json(const TrainConfig& config) {
  return json{{"model", anselect::to_string(config.model_kind)},
              {"learning_rate", config.learning_rate},
              {"lambda", config.lambda},
              {"epochs", config.epochs},
              {"batch_size", config.batch_size},
              {"seed", config.seed},
              {"adagrad_epsilon", config.adagrad_epsilon}};
}

json dataset_ref(const std::string& path) {
  return json{{"path", path}, {"digest", anselect::file_digest(path)}};
}

// ---------------------------------------------------------------------------
// Shared pieces.

std::vector<RankedList> combined_rankings(
    const std::vector<QuestionGroup>& groups, const ModelTheta& theta,
    const EmbeddingTable& table, const CombinerModel& combiner,
    const IdfTable& idf) {
  const auto& stoplist = anselect::builtin_stopwords();
  std::vector<RankedList> rankings;
  rankings.reserve(groups.size());
  for (const auto& group : groups) {
    std::vector<RankedEntry> entries;
    entries.reserve(group.instances.size());
    for (const auto& instance : group.instances) {
      entries.push_back(RankedEntry{
          instance.answer_id,
          anselect::predict_combined(instance, theta, combiner, table, idf,
                                     stoplist),
          instance.label});
    }
    rankings.push_back(
        anselect::make_ranked(group.question_id, std::move(entries)));
  }
  return rankings;
}

void check_dim(const ModelTheta& theta, const EmbeddingTable& table) {
  if (theta.dim() != table.dim) {
    throw std::runtime_error(
        "checkpoint dimension " + std::to_string(theta.dim()) +
        " does not match embeddings dimension " + std::to_string(table.dim));
  }
}

void print_eval_line(const EvalResult& result) {
  std::printf("MAP %.4f  MRR %.4f  (n=%zu)\n", result.map, result.mrr,
              result.n_scored);
}

void write_trace(std::ostream& out,
                 const std::vector<anselect::EpochTrace>& trace) {
  out << "epoch\ttrain_loss\tdev_map\tdev_mrr\n";
  char buffer[160];
  for (const auto& entry : trace) {
    std::snprintf(buffer, sizeof(buffer), "%d\t%.10g\t%.6f\t%.6f\n",
                  entry.epoch, entry.train_loss, entry.dev_map, entry.dev_mrr);
    out << buffer;
  }
}

void train_and_save_combiner(const std::vector<QuestionGroup>& train_groups,
                             const ModelTheta& theta,
                             const EmbeddingTable& table,
                             const std::string& combiner_out) {
  const auto& stoplist = anselect::builtin_stopwords();
  IdfTable idf = anselect::build_idf(train_groups);
  std::vector<Eigen::Vector3d> features;
  std::vector<int> labels;
  for (const auto& group : train_groups) {
    for (const auto& instance : group.instances) {
      features.push_back(
          anselect::extract_features(instance, theta, table, idf, stoplist));
      labels.push_back(instance.label);
    }
  }
  CombinerModel combiner = anselect::train_combiner(features, labels, 0.01);
  anselect::save_combiner(combiner_out, combiner, idf);
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_stats(const std::vector<std::string>& data_paths) {
  std::printf("%-32s %12s %12s %12s\n", "data", "questions", "pairs",
              "pct_correct");
  for (const auto& path : data_paths) {
    auto stats = anselect::split_stats(anselect::parse_dataset(path));
    std::printf("%-32s %12zu %12zu %12.1f\n", path.c_str(), stats.n_questions,
                stats.n_pairs, stats.pct_correct);
  }
  return 0;
}

struct TrainArgs {
  std::string model;
  std::string train_path;
  std::string dev_path;
  std::string embeddings_path;
  std::string config_path;
  std::string out_path;
  std::string trace_out;
  std::string combiner_out;
  std::optional<double> learning_rate;
  std::optional<double> lambda;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> adagrad_epsilon;
};

TrainConfig resolve_config(const TrainArgs& args) {
  TrainConfig config;
  if (!args.config_path.empty()) {
    for (const auto& [key, value] : parse_kv_file(args.config_path)) {
      apply_config_entry(config, key, value);
    }
  }
  // CLI flags override file values.
  if (!args.model.empty()) {
    config.model_kind = anselect::model_kind_from_string(args.model);
  }
  if (args.learning_rate) config.learning_rate = *args.learning_rate;
  if (args.lambda) config.lambda = *args.lambda;
  if (args.epochs) config.epochs = *args.epochs;
  if (args.batch_size) config.batch_size = *args.batch_size;
  if (args.seed) config.seed = *args.seed;
  if (args.adagrad_epsilon) config.adagrad_epsilon = *args.adagrad_epsilon;
  config.validate();
  return config;
}

int cmd_train(const TrainArgs& args) {
  TrainConfig config = resolve_config(args);
  EmbeddingTable table = anselect::load_embeddings(args.embeddings_path);
  auto train_groups = anselect::parse_dataset(args.train_path);
  auto dev_groups = anselect::parse_dataset(args.dev_path);

  anselect::TrainResult result =
      anselect::train(train_groups, dev_groups, table, config);
  anselect::save_checkpoint(args.out_path, result.theta);

  if (args.trace_out.empty()) {
    write_trace(std::cout, result.trace);
  } else {
    std::ofstream trace(args.trace_out);
    if (!trace) {
      throw std::runtime_error("cannot write trace file: " + args.trace_out);
    }
    write_trace(trace, result.trace);
  }

  if (!args.combiner_out.empty()) {
    train_and_save_combiner(train_groups, result.theta, table,
                            args.combiner_out);
  }

  json manifest{
      {"command", "train"},
      {"timestamp", anselect::utc_timestamp()},
      {"seed", config.seed},
      {"config", config_to_json(config)},
      {"datasets",
       {{"train", dataset_ref(args.train_path)},
        {"dev", dataset_ref(args.dev_path)},
        {"embeddings", dataset_ref(args.embeddings_path)}}},
      {"outputs", {{"checkpoint", args.out_path}}},
      {"metrics",
       {{"best_epoch", result.best_epoch},
        {"dev_map", result.best_dev_map},
        {"dev_mrr", result.best_dev_mrr}}}};
  if (!args.trace_out.empty()) manifest["outputs"]["trace"] = args.trace_out;
  if (!args.combiner_out.empty()) {
    manifest["outputs"]["combiner"] = args.combiner_out;
  }
  anselect::write_manifest(args.out_path + ".manifest.json", manifest);

  std::printf("best epoch %d  dev MAP %.4f  dev MRR %.4f\n", result.best_epoch,
              result.best_dev_map, result.best_dev_mrr);
  return 0;
}

struct GridArgs {
  std::string model;
  std::string grid_file;
  std::string train_path;
  std::string dev_path;
  std::string embeddings_path;
  std::string out_path;
  std::string table_out;
  std::string combiner_out;
  std::uint64_t seed = 1;
};

void write_grid_table(std::ostream& out,
                      const std::vector<anselect::GridCell>& table) {
  out << "model\tlearning_rate\tlambda\tepochs\tbatch_size\tseed\tdev_map"
         "\tdev_mrr\tbest_epoch\tstatus\n";
  char buffer[256];
  for (const auto& cell : table) {
    const auto& c = cell.config;
    if (cell.ok()) {
      std::snprintf(buffer, sizeof(buffer),
                    "%s\t%g\t%g\t%d\t%d\t%llu\t%.6f\t%.6f\t%d\tok\n",
                    anselect::to_string(c.model_kind).c_str(), c.learning_rate,
                    c.lambda, c.epochs, c.batch_size,
                    static_cast<unsigned long long>(c.seed), cell.dev_map,
                    cell.dev_mrr, cell.best_epoch);
      out << buffer;
    } else {
      std::snprintf(buffer, sizeof(buffer), "%s\t%g\t%g\t%d\t%d\t%llu\t\t\t\t",
                    anselect::to_string(c.model_kind).c_str(), c.learning_rate,
                    c.lambda, c.epochs, c.batch_size,
                    static_cast<unsigned long long>(c.seed));
      out << buffer << "error: " << cell.error << '\n';
    }
  }
}

int cmd_grid(const GridArgs& args) {
  TrainConfig base;
  base.seed = args.seed;
  if (!args.model.empty()) {
    base.model_kind = anselect::model_kind_from_string(args.model);
  }
  std::vector<TrainConfig> grid;
  if (!args.grid_file.empty()) {
    grid = grid_from_file(args.grid_file, base);
  } else {
    if (args.model.empty()) {
      throw std::runtime_error("grid: --model is required without --grid-file");
    }
    grid = anselect::default_grid(base.model_kind, args.seed);
  }

  EmbeddingTable table = anselect::load_embeddings(args.embeddings_path);
  auto train_groups = anselect::parse_dataset(args.train_path);
  auto dev_groups = anselect::parse_dataset(args.dev_path);

  anselect::GridResult result =
      anselect::grid_search(grid, train_groups, dev_groups, table);
  anselect::save_checkpoint(args.out_path, result.best.theta);

  if (args.table_out.empty()) {
    write_grid_table(std::cout, result.table);
  } else {
    std::ofstream out(args.table_out);
    if (!out) {
      throw std::runtime_error("cannot write score table: " + args.table_out);
    }
    write_grid_table(out, result.table);
  }

  if (!args.combiner_out.empty()) {
    train_and_save_combiner(train_groups, result.best.theta, table,
                            args.combiner_out);
  }

  json manifest{
      {"command", "grid"},
      {"timestamp", anselect::utc_timestamp()},
      {"seed", args.seed},
      {"config", config_to_json(result.best_config)},
      {"grid_size", grid.size()},
      {"datasets",
       {{"train", dataset_ref(args.train_path)},
        {"dev", dataset_ref(args.dev_path)},
        {"embeddings", dataset_ref(args.embeddings_path)}}},
      {"outputs", {{"checkpoint", args.out_path}}},
      {"metrics",
       {{"best_epoch", result.best.best_epoch},
        {"dev_map", result.best.best_dev_map},
        {"dev_mrr", result.best.best_dev_mrr}}}};
  if (!args.table_out.empty()) manifest["outputs"]["table"] = args.table_out;
  if (!args.combiner_out.empty()) {
    manifest["outputs"]["combiner"] = args.combiner_out;
  }
  anselect::write_manifest(args.out_path + ".manifest.json", manifest);

  std::printf("best config: model=%s lr=%g lambda=%g  dev MAP %.4f  dev MRR "
              "%.4f\n",
              anselect::to_string(result.best_config.model_kind).c_str(),
              result.best_config.learning_rate, result.best_config.lambda,
              result.best.best_dev_map, result.best.best_dev_mrr);
  return 0;
}

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string embeddings;
  std::string combiner;
};

std::vector<RankedList> rankings_for_checkpoint(const EvalArgs& args,
                                                ModelTheta& theta_out) {
  EmbeddingTable table = anselect::load_embeddings(args.embeddings);
  theta_out = anselect::load_checkpoint(args.ckpt);
  check_dim(theta_out, table);
  auto groups = anselect::parse_dataset(args.data);
  if (!args.combiner.empty()) {
    auto [combiner, idf] = anselect::load_combiner(args.combiner);
    return combined_rankings(groups, theta_out, table, combiner, idf);
  }
  return anselect::score_groups(groups, theta_out, table,
                                anselect::builtin_stopwords());
}

int cmd_eval(const EvalArgs& args) {
  ModelTheta theta;
  print_eval_line(anselect::evaluate(rankings_for_checkpoint(args, theta)));
  return 0;
}

struct PredictArgs {
  EvalArgs eval;
  std::string out_path;
  std::string features_out;
};

int cmd_predict(const PredictArgs& args) {
  EmbeddingTable table = anselect::load_embeddings(args.eval.embeddings);
  ModelTheta theta = anselect::load_checkpoint(args.eval.ckpt);
  check_dim(theta, table);
  auto groups = anselect::parse_dataset(args.eval.data);
  const auto& stoplist = anselect::builtin_stopwords();

  std::optional<CombinerModel> combiner;
  std::optional<IdfTable> idf;
  if (!args.eval.combiner.empty()) {
    auto loaded = anselect::load_combiner(args.eval.combiner);
    combiner = loaded.first;
    idf = loaded.second;
  }

  std::ofstream out(args.out_path);
  if (!out) {
    throw std::runtime_error("cannot write predictions: " + args.out_path);
  }
  out << "question_id\tanswer_id\tprobability\tlabel\n";
  char buffer[256];
  for (const auto& group : groups) {
    for (const auto& instance : group.instances) {
      double p;
      if (combiner) {
        p = anselect::predict_combined(instance, theta, *combiner, table,
                                       *idf, stoplist);
      } else {
        anselect::TrainingPair pair{instance.question_tokens,
                                    instance.answer_tokens, instance.label};
        auto encoded = anselect::encode_pair(pair, theta, table, stoplist);
        p = anselect::score(encoded.q, encoded.a, theta.matcher);
      }
      std::snprintf(buffer, sizeof(buffer), "%s\t%s\t%.12g\t%d\n",
                    group.question_id.c_str(), instance.answer_id.c_str(), p,
                    instance.label);
      out << buffer;
    }
  }

  if (!args.features_out.empty()) {
    // Audit dump; the IDF table comes from the combiner file when given,
    // otherwise it is built from the scored data itself.
    IdfTable feature_idf = idf ? *idf : anselect::build_idf(groups);
    std::ofstream feats(args.features_out);
    if (!feats) {
      throw std::runtime_error("cannot write features: " + args.features_out);
    }
    feats << "question_id\tanswer_id\tcount\tidf_count\tmodel_prob\tlabel\n";
    for (const auto& group : groups) {
      for (const auto& instance : group.instances) {
        Eigen::Vector3d f = anselect::extract_features(instance, theta, table,
                                                       feature_idf, stoplist);
        std::snprintf(buffer, sizeof(buffer), "%s\t%s\t%d\t%.12g\t%.12g\t%d\n",
                      group.question_id.c_str(), instance.answer_id.c_str(),
                      static_cast<int>(f(0)), f(1), f(2), instance.label);
        feats << buffer;
      }
    }
  }

  json manifest{{"command", "predict"},
                {"timestamp", anselect::utc_timestamp()},
                {"datasets",
                 {{"data", dataset_ref(args.eval.data)},
                  {"embeddings", dataset_ref(args.eval.embeddings)},
                  {"checkpoint", dataset_ref(args.eval.ckpt)}}},
                {"outputs", {{"predictions", args.out_path}}}};
  if (!args.eval.combiner.empty()) {
    manifest["datasets"]["combiner"] = dataset_ref(args.eval.combiner);
  }
  if (!args.features_out.empty()) {
    manifest["outputs"]["features"] = args.features_out;
  }
  anselect::write_manifest(args.out_path + ".manifest.json", manifest);
  return 0;
}

struct BaselineArgs {
  std::string kind;
  std::string data;
  std::string idf_data;
  std::uint64_t seed = 1;
};

std::vector<RankedList> baseline_rankings_for(const BaselineArgs& args) {
  auto groups = anselect::parse_dataset(args.data);
  BaselineKind kind = anselect::baseline_kind_from_string(args.kind);
  const auto& stoplist = anselect::builtin_stopwords();
  if (kind == BaselineKind::wgt_count) {
    auto idf_groups = args.idf_data.empty() || args.idf_data == args.data
                          ? groups
                          : anselect::parse_dataset(args.idf_data);
    IdfTable idf = anselect::build_idf(idf_groups);
    return anselect::baseline_rankings(groups, kind, stoplist, &idf,
                                       args.seed);
  }
  return anselect::baseline_rankings(groups, kind, stoplist, nullptr,
                                     args.seed);
}

int cmd_baseline(const BaselineArgs& args) {
  print_eval_line(anselect::evaluate(baseline_rankings_for(args)));
  return 0;
}

struct ExportArgs {
  std::string data;
  std::string ckpt;
  std::string embeddings;
  std::string combiner;
  std::string kind;
  std::string idf_data;
  std::string run_out;
  std::string qrels_out;
  std::string run_id = "anselect";
  std::uint64_t seed = 1;
};

int cmd_export_trec(const ExportArgs& args) {
  std::vector<RankedList> rankings;
  if (!args.ckpt.empty()) {
    EvalArgs eval{args.ckpt, args.data, args.embeddings, args.combiner};
    ModelTheta theta;
    rankings = rankings_for_checkpoint(eval, theta);
  } else if (!args.kind.empty()) {
    BaselineArgs baseline{args.kind, args.data, args.idf_data, args.seed};
    rankings = baseline_rankings_for(baseline);
  } else {
    throw std::runtime_error("export-trec: pass either --ckpt or --kind");
  }
  anselect::export_trec(rankings, args.run_out, args.qrels_out, args.run_id);

  json manifest{{"command", "export-trec"},
                {"timestamp", anselect::utc_timestamp()},
                {"run_id", args.run_id},
                {"datasets", {{"data", dataset_ref(args.data)}}},
                {"outputs",
                 {{"run", args.run_out}, {"qrels", args.qrels_out}}}};
  if (!args.ckpt.empty()) {
    manifest["datasets"]["checkpoint"] = dataset_ref(args.ckpt);
    manifest["datasets"]["embeddings"] = dataset_ref(args.embeddings);
    if (!args.combiner.empty()) {
      manifest["datasets"]["combiner"] = dataset_ref(args.combiner);
    }
  } else {
    manifest["baseline"] = args.kind;
    manifest["seed"] = args.seed;
  }
  anselect::write_manifest(args.run_out + ".manifest.json", manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributional sentence models for answer sentence selection"};
  app.require_subcommand(1);

  // stats
  std::vector<std::string> stats_paths;
  auto* stats = app.add_subcommand("stats", "dataset split statistics");
  stats->add_option("--data", stats_paths, "dataset TSV file(s)")
      ->required()
      ->expected(-1);

  // train
  TrainArgs train_args;
  double train_lr = 0, train_lambda = 0, train_eps = 0;
  int train_epochs = 0, train_batch = 0;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "train one configuration");
  train->add_option("--model", train_args.model, "unigram or bigram")
      ->check(CLI::IsMember({"unigram", "bigram"}));
  train->add_option("--train", train_args.train_path, "training TSV")
      ->required();
  train->add_option("--dev", train_args.dev_path, "development TSV")
      ->required();
  train->add_option("--embeddings", train_args.embeddings_path,
                    "embeddings file")
      ->required();
  train->add_option("--config", train_args.config_path, "key = value config");
  train->add_option("--out", train_args.out_path, "checkpoint path")
      ->required();
  train->add_option("--trace-out", train_args.trace_out,
                    "training trace TSV (default: stdout)");
  train->add_option("--combiner-out", train_args.combiner_out,
                    "also fit the three-feature combiner and save it here");
  auto* lr_opt = train->add_option("--lr", train_lr, "AdaGrad learning rate");
  auto* lambda_opt = train->add_option("--lambda", train_lambda,
                                       "L2 regularization weight");
  auto* epochs_opt = train->add_option("--epochs", train_epochs, "epochs");
  auto* batch_opt =
      train->add_option("--batch-size", train_batch, "mini-batch size");
  auto* seed_opt = train->add_option("--seed", train_seed, "RNG seed");
  auto* eps_opt =
      train->add_option("--adagrad-eps", train_eps, "AdaGrad denominator eps");

  // grid
  GridArgs grid_args;
  auto* grid = app.add_subcommand("grid", "grid search on dev MAP");
  grid->add_option("--model", grid_args.model, "unigram or bigram")
      ->check(CLI::IsMember({"unigram", "bigram"}));
  grid->add_option("--grid-file", grid_args.grid_file,
                   "key = comma,separated,values (Cartesian product)");
  grid->add_option("--train", grid_args.train_path, "training TSV")
      ->required();
  grid->add_option("--dev", grid_args.dev_path, "development TSV")->required();
  grid->add_option("--embeddings", grid_args.embeddings_path,
                   "embeddings file")
      ->required();
  grid->add_option("--out", grid_args.out_path, "best checkpoint path")
      ->required();
  grid->add_option("--table-out", grid_args.table_out,
                   "score table TSV (default: stdout)");
  grid->add_option("--combiner-out", grid_args.combiner_out,
                   "fit the combiner on the best model and save it here");
  grid->add_option("--seed", grid_args.seed, "RNG seed for the default grid");

  // eval
  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "MAP/MRR of a checkpoint");
  eval->add_option("--ckpt", eval_args.ckpt, "model checkpoint")->required();
  eval->add_option("--data", eval_args.data, "dataset TSV")->required();
  eval->add_option("--embeddings", eval_args.embeddings, "embeddings file")
      ->required();
  eval->add_option("--combiner", eval_args.combiner, "combiner file");

  // predict
  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "per-pair probabilities TSV");
  predict->add_option("--ckpt", predict_args.eval.ckpt, "model checkpoint")
      ->required();
  predict->add_option("--data", predict_args.eval.data, "dataset TSV")
      ->required();
  predict
      ->add_option("--embeddings", predict_args.eval.embeddings,
                   "embeddings file")
      ->required();
  predict->add_option("--combiner", predict_args.eval.combiner,
                      "combiner file");
  predict->add_option("--out", predict_args.out_path, "output TSV")
      ->required();
  predict->add_option("--features-out", predict_args.features_out,
                      "feature audit TSV");

  // baseline
  BaselineArgs baseline_args;
  auto* baseline = app.add_subcommand("baseline", "count/random baseline MAP/MRR");
  baseline->add_option("--kind", baseline_args.kind, "baseline kind")
      ->check(CLI::IsMember({"random", "count", "wgt-count"}))
      ->required();
  baseline->add_option("--data", baseline_args.data, "dataset TSV")
      ->required();
  baseline->add_option("--idf-data", baseline_args.idf_data,
                       "corpus for IDF values (default: --data)");
  baseline->add_option("--seed", baseline_args.seed,
                       "seed for the random baseline");

  // export-trec
  ExportArgs export_args;
  auto* export_trec =
      app.add_subcommand("export-trec", "write trec_eval run/qrels files");
  export_trec->add_option("--data", export_args.data, "dataset TSV")
      ->required();
  export_trec->add_option("--ckpt", export_args.ckpt, "model checkpoint");
  export_trec->add_option("--embeddings", export_args.embeddings,
                          "embeddings file");
  export_trec->add_option("--combiner", export_args.combiner,
                          "combiner file");
  export_trec->add_option("--kind", export_args.kind, "baseline kind")
      ->check(CLI::IsMember({"random", "count", "wgt-count"}));
  export_trec->add_option("--idf-data", export_args.idf_data,
                          "corpus for IDF values (default: --data)");
  export_trec->add_option("--run-out", export_args.run_out, "run file")
      ->required();
  export_trec->add_option("--qrels-out", export_args.qrels_out, "qrels file")
      ->required();
  export_trec->add_option("--run-id", export_args.run_id, "run identifier");
  export_trec->add_option("--seed", export_args.seed,
                          "seed for the random baseline");

  try {
    app.parse(argc, argv);

    if (stats->parsed()) return cmd_stats(stats_paths);
    if (train->parsed()) {
      if (lr_opt->count()) train_args.learning_rate = train_lr;
      if (lambda_opt->count()) train_args.lambda = train_lambda;
      if (epochs_opt->count()) train_args.epochs = train_epochs;
      if (batch_opt->count()) train_args.batch_size = train_batch;
      if (seed_opt->count()) train_args.seed = train_seed;
      if (eps_opt->count()) train_args.adagrad_epsilon = train_eps;
      return cmd_train(train_args);
    }
    if (grid->parsed()) return cmd_grid(grid_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (predict->parsed()) return cmd_predict(predict_args);
    if (baseline->parsed()) return cmd_baseline(baseline_args);
    if (export_trec->parsed()) return cmd_export_trec(export_args);
    return 2;
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForAllHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& parse_error) {
    std::cerr << parse_error.what() << "\n"
              << "run '" << argv[0] << " --help' for usage\n";
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}
