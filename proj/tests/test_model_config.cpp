#include <filesystem>
#include <fstream>
#include <random>

#include "chartparse/config.hpp"
#include "chartparse/model.hpp"
#include "chartparse/synth.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace chartparse;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "chartparse_unit";
  fs::create_directories(dir);
  return dir / name;
}

ModelConfig small_config(HistoryKind history) {
  ModelConfig c;
  c.dims = {8, 4, 4, 6, 10, 12};
  c.history.kind = history;
  c.history.hidden = 6;
  c.history.label_dim = 4;
  return c;
}

std::size_t param_count(const ModelConfig& c, const Vocab& v) { return Model(c, v, 1).params().scalar_count(); }

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("render and parse round-trip") {
    RunConfig c;
    c.model.history.kind = HistoryKind::Stack;
    c.model.history.input_label = false;
    c.model.dims.lstm_dim = 17;
    c.train.explore = true;
    c.train.unk_z = 0.123456789012345;
    c.train.objectives = {DecoderKind::InOrder, DecoderKind::TopDown};
    c.train_path = "train.txt";
    c.log_path = "log.tsv";
    CHECK(parse_config(render_config(c)) == c);
    CHECK(parse_config(render_config(RunConfig{})) == RunConfig{});
  }

  TEST_CASE("comments, overrides and errors") {
    const RunConfig c = parse_config("# a comment\n\nepochs = 7\nhistory=chain\n");
    CHECK(c.train.epochs == 7);
    CHECK(c.model.history.kind == HistoryKind::Chain);
    try {
      parse_config("epochs = 3\nlearning_rate = 2\n");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("epochs = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("history = tree\n"), ConfigError);
  }
}

TEST_SUITE("model") {
  TEST_CASE("save and load round-trip") {
    std::mt19937_64 rng(1);
    const auto corpus = SyntheticGrammar(3, 8).corpus(rng, 6);
    Model m(small_config(HistoryKind::Chain), Vocab::build(corpus), 7);
    const fs::path path = scratch("roundtrip.model");
    m.save(path.string());
    const Model back = Model::load(path.string());
    CHECK(back.config() == m.config());
    CHECK(back.labels() == m.labels());
    CHECK(back.vocab().word_counts == m.vocab().word_counts);
    const auto a = m.params().parameters();
    const auto b = back.params().parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k]->name == b[k]->name);
      CHECK(a[k]->value == b[k]->value);
    }
    for (const Tree& t : corpus) CHECK(back.parse(leaves_of(t)) == m.parse(leaves_of(t)));
  }

  TEST_CASE("corrupt files") {
    std::mt19937_64 rng(1);
    const auto corpus = SyntheticGrammar(3, 8).corpus(rng, 3);
    Model m(small_config(HistoryKind::None), Vocab::build(corpus), 7);
    const fs::path good = scratch("good.model");
    m.save(good.string());
    std::string bytes;
    {
      std::ifstream in(good, std::ios::binary);
      bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto write = [&](const std::string& name, const std::string& content) {
      const fs::path p = scratch(name);
      std::ofstream(p, std::ios::binary) << content;
      return p.string();
    };
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(Model::load(write("magic.model", bad_magic)), ModelError);
    CHECK_THROWS_AS(Model::load(write("short.model", bytes.substr(0, bytes.size() - 8))), ModelError);
    std::string bad_version = bytes;
    const auto at = bad_version.find("\"format_version\":1");
    REQUIRE(at != std::string::npos);
    bad_version[at + 17] = '9';
    try {
      Model::load(write("version.model", bad_version));
      FAIL("expected an error");
    } catch (const ModelError& e) {
      CHECK(std::string(e.what()).find("version 9") != std::string::npos);
    }
    CHECK_THROWS_AS(Model::load(scratch("missing.model").string()), ModelError);
  }

  TEST_CASE("history ablations change the parameter count") {
    std::mt19937_64 rng(1);
    const Vocab v = Vocab::build(SyntheticGrammar().corpus(rng, 5));
    const ModelConfig base = small_config(HistoryKind::Chain);
    const std::size_t none = param_count(small_config(HistoryKind::None), v);
    const std::size_t full = param_count(base, v);
    const std::size_t L = static_cast<std::size_t>(v.labels.size());
    const std::size_t H = 6, span = 20, mlp = 12, E = 4;
    CHECK(full == none + L * E + 4 * H * (span + E + H) + 4 * H + 2 * mlp * H);

    ModelConfig no_label_in = base;
    no_label_in.history.input_label = false;
    CHECK(param_count(no_label_in, v) == full - L * E - 4 * H * E);
    ModelConfig no_span_in = base;
    no_span_in.history.input_span = false;
    CHECK(param_count(no_span_in, v) == full - 4 * H * span);
    ModelConfig no_label_out = base;
    no_label_out.history.predict_label = false;
    CHECK(param_count(no_label_out, v) == full - mlp * H);
    ModelConfig no_span_out = base;
    no_span_out.history.predict_span = false;
    CHECK(param_count(no_span_out, v) == full - mlp * H);
  }
}
