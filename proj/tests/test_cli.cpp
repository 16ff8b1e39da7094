#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chartparse/eval.hpp"
#include "chartparse/treebank.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "chartparse_cli";

int run(const std::string& args) {
  fs::create_directories(kDir);
  const std::string cmd = std::string(CHARTPARSE_BIN) + " " + args + " >" + (kDir / "out.txt").string() + " 2>" +
                          (kDir / "err.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string at(const std::string& name) { return (kDir / name).string(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2") {
    CHECK(run("") == 2);
    CHECK(run("train --model-out " + at("m.bin")) == 2);
    CHECK(slurp(kDir / "err.txt").find("--train") != std::string::npos);
    CHECK(run("synth --count 4 --output " + at("tiny.txt")) == 0);
    CHECK(run("train --train " + at("tiny.txt") + " --model-out " + at("m.bin") + " --decoder cky --history chain") == 2);
    CHECK(run("oracle-check --trees 0") == 2);
    CHECK(run("train --train " + at("tiny.txt") + " --model-out " + at("m.bin") + " --set bogus=1") == 2);
  }

  TEST_CASE("oracle check") {
    CHECK(run("oracle-check --max-len 1 --trees 5") == 0);
    CHECK(run("oracle-check --max-len 5 --trees 40 --seed 3") == 0);
    CHECK(slurp(kDir / "out.txt").find("violations: 0") != std::string::npos);
  }

  TEST_CASE("train, parse and eval") {
    REQUIRE(run("synth --count 12 --seed 4 --min-len 4 --max-len 8 --output " + at("train.txt")) == 0);
    REQUIRE(run("train --train " + at("train.txt") + " --dev " + at("train.txt") + " --model-out " + at("model.bin") +
                " --epochs 2 --history stack --log " + at("log.tsv") +
                " --set word_dim=8 --set lstm_dim=10 --set mlp_dim=12 --set history_hidden=6") == 0);
    CHECK(fs::exists(kDir / "model.bin"));
    CHECK(slurp(kDir / "log.tsv").find("# history = stack") != std::string::npos);

    CHECK(run("parse --model " + at("model.bin") + " --input " + at("train.txt") + " --output " + at("pred.txt")) == 0);
    const auto pred = chartparse::read_treebank(at("pred.txt"));
    CHECK(pred.size() == 12);
    CHECK(run("eval --gold " + at("train.txt") + " --pred " + at("pred.txt")) == 0);
    CHECK(slurp(kDir / "out.txt").rfind("LR=", 0) == 0);

    std::ofstream(at("tokens.txt")) << "the/DT dog/NN runs/VBZ ./.\n";
    CHECK(run("parse --model " + at("model.bin") + " --input " + at("tokens.txt") + " --output " + at("p2.txt")) == 0);
    CHECK(chartparse::read_treebank(at("p2.txt")).size() == 1);
    CHECK(run("parse --model " + at("model.bin") + " --decoder cky --input " + at("tokens.txt") + " --output " +
              at("p2.txt")) == 2);

    std::ofstream(at("empty.txt")) << "";
    CHECK(run("parse --model " + at("model.bin") + " --input " + at("empty.txt") + " --output " + at("p3.txt")) == 0);
    CHECK(slurp(kDir / "p3.txt").empty());

    CHECK(run("parse --model " + at("train.txt") + " --input " + at("tokens.txt") + " --output " + at("p4.txt")) == 1);
    std::ofstream(at("short.txt")) << "(S (NP (DT a)))\n";
    CHECK(run("eval --gold " + at("train.txt") + " --pred " + at("short.txt")) == 1);
    std::ofstream(at("broken.txt")) << "(S (NP (DT a))\n";
    CHECK(run("eval --gold " + at("broken.txt") + " --pred " + at("broken.txt")) == 1);
  }
}
