// chartparse command-line driver: train, parse, eval, oracle-check, synth.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "chartparse/config.hpp"
#include "chartparse/eval.hpp"
#include "chartparse/model.hpp"
#include "chartparse/oracle.hpp"
#include "chartparse/synth.hpp"
#include "chartparse/training.hpp"

using namespace chartparse;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<Tree> load_trees(const std::string& path) {
  try {
    return read_treebank(path);
  } catch (const TreebankError& e) {
    throw std::runtime_error(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

// One sentence per line: a bracketed tree, or space-separated word/TAG tokens.
std::vector<std::vector<Leaf>> read_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::vector<Leaf>> out;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '(') {
      try {
        out.push_back(leaves_of(parse_sexpr(line)));
      } catch (const ParseError& e) {
        throw std::runtime_error(path + ":" + std::to_string(no) + ": " + e.what());
      }
      continue;
    }
    std::istringstream tokens(line);
    std::vector<Leaf> sent;
    for (std::string tok; tokens >> tok;) {
      const auto slash = tok.rfind('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == tok.size())
        throw std::runtime_error(path + ":" + std::to_string(no) + ": token '" + tok + "' is not word/TAG");
      sent.push_back({tok.substr(0, slash), tok.substr(slash + 1)});
    }
    out.push_back(std::move(sent));
  }
  return out;
}

int cmd_train(RunConfig cfg) {
  if (cfg.train_path.empty()) throw UsageError("--train is required");
  if (cfg.model_out.empty()) throw UsageError("--model-out is required");
  try {
    validate_decoder(cfg.model.decoder, cfg.model.history.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto& objectives = cfg.train.objectives;
  if (cfg.model.decoder == DecoderKind::Cky && objectives.empty())
    throw UsageError("cky has no decision sequence to train; use inorder or topdown, or set objectives");
  if (std::find(objectives.begin(), objectives.end(), DecoderKind::Cky) != objectives.end())
    throw UsageError("objectives may only list inorder and topdown");

  std::cerr << "# resolved configuration\n" << render_config(cfg);
  const std::vector<Tree> train_trees = load_trees(cfg.train_path);
  if (train_trees.empty()) throw std::runtime_error(cfg.train_path + ": no trees");
  const std::vector<Tree> dev_trees = cfg.dev_path.empty() ? std::vector<Tree>{} : load_trees(cfg.dev_path);

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path);
    if (!log) throw std::runtime_error("cannot write " + cfg.log_path);
    std::istringstream lines(render_config(cfg));
    for (std::string l; std::getline(lines, l);) log << "# " << l << "\n";
    log << "epoch\ttrain_loss\tdev_LR\tdev_LP\tdev_F1\tseconds\n";
  }

  Model model(cfg.model, Vocab::build(train_trees), cfg.train.seed);
  const TrainResult result = train(model, train_trees, dev_trees, cfg.train, [&](const EpochStats& s, Model&) {
    const std::string line = format_epoch(s);
    std::cerr << line << "\n";
    if (log.is_open()) log << line << "\n" << std::flush;
    return true;
  });
  model.save(cfg.model_out);
  if (result.best_epoch > 0)
    std::cerr << "best dev F1 " << result.best_dev_f1 << " at epoch " << result.best_epoch << "\n";
  std::cerr << "wrote " << cfg.model_out << "\n";
  return kOk;
}

int cmd_parse(const std::string& model_path, const std::string& input, const std::string& output,
              const std::string& decoder_name, int threads) {
  if (threads < 1) throw UsageError("--threads must be positive");
  Model model = [&] {
    try {
      return Model::load(model_path);
    } catch (const ModelError& e) {
      throw std::runtime_error(e.what());
    }
  }();
  DecoderKind decoder = model.config().decoder;
  if (!decoder_name.empty()) {
    try {
      decoder = parse_decoder_kind(decoder_name);
      validate_decoder(decoder, model.config().history.kind);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const auto sentences = read_sentences(input);
  std::vector<Tree> trees;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    Tree t;
    t.label = kFallbackRootLabel;
    for (const Leaf& l : s) t.children.push_back(Tree::preterminal(l.tag, l.word));
    trees.push_back(std::move(t));
  }
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Tree> parsed = parse_corpus(model, trees, decoder, threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot write " + output);
  for (const Tree& t : parsed) out << render_sexpr(t) << "\n";
  std::cerr << "parsed " << parsed.size() << " sentences in " << secs << " s ("
            << (secs > 0 ? static_cast<double>(parsed.size()) / secs : 0.0) << " sents/sec)\n";
  return kOk;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path) {
  const auto gold = load_trees(gold_path);
  const auto pred = load_trees(pred_path);
  try {
    std::cout << format_report(score_corpus(gold, pred)) << "\n";
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
  return kOk;
}

int cmd_oracle_check(int max_len, int trees, std::uint64_t seed, const std::string& interpretation) {
  if (max_len < 1) throw UsageError("--max-len must be at least 1");
  if (trees < 1) throw UsageError("--trees must be at least 1");
  OracleCheckOptions options;
  try {
    options.rule = parse_enclosure_rule(interpretation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(1, max_len);
  OracleCheckReport report;
  for (int t = 0; t < trees; ++t) report.merge(check_oracle(random_tree(rng, length(rng)), options));
  std::cout << "trees tested: " << report.trees << "\n"
            << "in-order states tested: " << report.inorder_states << "\n"
            << "top-down states tested: " << report.topdown_states << "\n"
            << "interpretation: " << to_string(options.rule) << "\n"
            << "soundness violations: " << report.soundness_violations << "\n"
            << "completeness violations: " << report.completeness_violations << "\n"
            << "boundary-set violations: " << report.bound_violations << "\n"
            << "top-down split violations: " << report.topdown_violations << "\n"
            << "full-set violations (informational): " << report.full_set_violations << "\n"
            << "violations: " << report.violations() << "\n";
  return report.violations() == 0 ? kOk : kDataError;
}

int cmd_synth(int count, std::uint64_t seed, int min_len, int max_len, const std::string& output) {
  if (count < 0 || min_len < 1 || max_len < min_len) throw UsageError("bad synth lengths or count");
  std::mt19937_64 rng(seed);
  write_treebank(output, SyntheticGrammar(min_len, max_len).corpus(rng, count));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chartparse: span-based constituency parsing with in-order, top-down and CKY decoders"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string config_path, train_path, dev_path, model_out, log_path, decoder, history;
  bool explore = false;
  std::uint64_t seed = 0;
  int epochs = -1;
  std::vector<std::string> overrides;
  train_cmd->add_option("--config", config_path, "key = value configuration file");
  train_cmd->add_option("--train", train_path, "training treebank");
  train_cmd->add_option("--dev", dev_path, "development treebank");
  train_cmd->add_option("--decoder", decoder, "cky, topdown or inorder");
  train_cmd->add_option("--history", history, "none, chain or stack");
  train_cmd->add_flag("--explore", explore, "follow model decisions during training");
  train_cmd->add_option("--model-out", model_out, "where to write the model");
  auto* seed_opt = train_cmd->add_option("--seed", seed, "master random seed");
  train_cmd->add_option("--epochs", epochs, "number of epochs");
  train_cmd->add_option("--log", log_path, "per-epoch log file");
  train_cmd->add_option("--set", overrides, "extra key=value settings")->allow_extra_args(false);

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "parse sentences with a trained model");
  std::string model_path, input, output, parse_decoder;
  int threads = 1;
  parse_cmd->add_option("--model", model_path, "model file")->required();
  parse_cmd->add_option("--input", input, "one sentence per line (tree or word/TAG tokens)")->required();
  parse_cmd->add_option("--output", output, "output treebank")->required();
  parse_cmd->add_option("--decoder", parse_decoder, "override the model's decoder");
  parse_cmd->add_option("--threads", threads, "worker threads");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "labeled bracket scores");
  std::string gold_path, pred_path;
  eval_cmd->add_option("--gold", gold_path, "gold treebank")->required();
  eval_cmd->add_option("--pred", pred_path, "predicted treebank")->required();

  // oracle-check
  auto* oracle_cmd = app.add_subcommand("oracle-check", "check the dynamic oracle against brute force");
  int max_len = 7, trees = 1000;
  std::uint64_t oracle_seed = 1;
  std::string interpretation = "strict";
  oracle_cmd->add_option("--max-len", max_len, "longest random sentence");
  oracle_cmd->add_option("--trees", trees, "number of random trees");
  oracle_cmd->add_option("--seed", oracle_seed, "random seed");
  oracle_cmd->add_option("--interpretation", interpretation, "strict or inclusive");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic treebank");
  int count = 100, min_len = 5, synth_max = 15;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  synth_cmd->add_option("--count", count, "number of trees");
  synth_cmd->add_option("--seed", synth_seed, "random seed");
  synth_cmd->add_option("--min-len", min_len, "shortest sentence");
  synth_cmd->add_option("--max-len", synth_max, "longest sentence");
  synth_cmd->add_option("--output", synth_out, "output treebank")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (*train_cmd) {
      RunConfig cfg;
      if (!config_path.empty()) {
        try {
          cfg = read_config(config_path);
        } catch (const ConfigError& e) {
          throw UsageError(e.what());
        }
      }
      try {
        for (const auto& kv : overrides) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
          apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!train_path.empty()) cfg.train_path = train_path;
        if (!dev_path.empty()) cfg.dev_path = dev_path;
        if (!model_out.empty()) cfg.model_out = model_out;
        if (!log_path.empty()) cfg.log_path = log_path;
        if (!decoder.empty()) apply_setting(cfg, "decoder", decoder);
        if (!history.empty()) apply_setting(cfg, "history", history);
        if (explore) cfg.train.explore = true;
        if (*seed_opt) cfg.train.seed = seed;
        if (epochs >= 0) cfg.train.epochs = epochs;
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      return cmd_train(cfg);
    }
    if (*parse_cmd) return cmd_parse(model_path, input, output, parse_decoder, threads);
    if (*eval_cmd) return cmd_eval(gold_path, pred_path);
    if (*oracle_cmd) return cmd_oracle_check(max_len, trees, oracle_seed, interpretation);
    if (*synth_cmd) return cmd_synth(count, synth_seed, min_len, synth_max, synth_out);
  } catch (const UsageError& e) {
    const auto active = app.get_subcommands();
    std::cerr << "usage error: " << e.what() << "\n\n" << (active.empty() ? app.help() : active.front()->help());
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
