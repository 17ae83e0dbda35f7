#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_dir;

int run(const std::string& args) {
  std::string cmd = "cd " + g_dir.string() + " && " + g_binary + " " + args +
                    " > /dev/null 2> stderr.txt";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <xfer-binary> [doctest args]\n", argv[0]);
    return 3;
  }
  g_binary = argv[1];
  g_dir = fs::temp_directory_path() / "xfer_cli_test";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  return ctx.run();
}

TEST_CASE("unknown flags and subcommands are usage errors") {
  CHECK(run("no-such-command") == 2);
  CHECK(run("synth --no-such-flag 1") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("missing input files fail with a nonzero exit") {
  CHECK(run("evaluate --task tagging --pred missing.conllu --gold missing.conllu") == 1);
  CHECK(!slurp(g_dir / "stderr.txt").empty());
}

TEST_CASE("synth is deterministic and manifest is written") {
  CHECK(run("synth --task tagging --num-sentences 40 --seed 5 --out a.conllu "
            "--out-dir runa") == 0);
  CHECK(run("synth --task tagging --num-sentences 40 --seed 5 --out b.conllu "
            "--out-dir runb") == 0);
  CHECK(slurp(g_dir / "a.conllu") == slurp(g_dir / "b.conllu"));
  auto manifest = nlohmann::json::parse(slurp(g_dir / "runa" / "manifest.json"));
  CHECK(manifest["command"] == "synth");
  CHECK(manifest["config"]["seed"] == 5);
}

TEST_CASE("evaluate on identical corpora prints accuracy 1") {
  REQUIRE(run("synth --task parsing --num-sentences 10 --seed 6 --out g.conllu "
              "--out-dir rune") == 0);
  CHECK(run("evaluate --task parsing --pred g.conllu --gold g.conllu "
            "--out-dir rune") == 0);
  auto report = nlohmann::json::parse(slurp(g_dir / "rune" / "evaluation.json"));
  CHECK(report["metric"] == "LAS");
  CHECK(report["accuracy"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("end-to-end tagging pipeline") {
  REQUIRE(run("synth --task tagging --num-sentences 80 --seed 7 "
              "--out t1.conllu --out-dir runp") == 0);
  REQUIRE(run("synth --task tagging --num-sentences 80 --seed 8 --noise 0.2 "
              "--out t2.conllu --out-dir runp") == 0);
  REQUIRE(run("synth --task tagging --num-sentences 40 --seed 9 "
              "--out unlab.conllu --out-dir runp") == 0);
  REQUIRE(run("train-source --task tagging --train t1.conllu --eta 0.02 "
              "--out s1.json --out-dir runp") == 0);
  REQUIRE(run("train-source --task tagging --train t2.conllu --eta 0.02 "
              "--seed 2 --out s2.json --out-dir runp") == 0);

  SUBCASE("build-charts emits a chart per sentence and a stats CSV") {
    REQUIRE(run("build-charts --source s1.json --source s2.json "
                "--input unlab.conllu --method lop --out-dir runc") == 0);
    std::string csv = slurp(g_dir / "runc" / "chart_stats.csv");
    CHECK(csv.rfind("sent_id,size_masked,size_total,precision_num,"
                    "precision_den,recall_num,recall_den\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);  // header + 40
    CHECK(fs::exists(g_dir / "runc" / "charts" / "s0.json"));
    // A rerun reuses the cache and reproduces the CSV byte for byte.
    REQUIRE(run("build-charts --source s1.json --source s2.json "
                "--input unlab.conllu --method lop --out-dir runc2") == 0);
    // Caches live under each out-dir, so copy the first one across.
    fs::create_directories(g_dir / "runc3");
    fs::copy(g_dir / "runc" / "cache", g_dir / "runc3" / "cache",
             fs::copy_options::recursive);
    REQUIRE(run("build-charts --source s1.json --source s2.json "
                "--input unlab.conllu --method lop --out-dir runc3") == 0);
    CHECK(slurp(g_dir / "runc2" / "chart_stats.csv") == csv);
    CHECK(slurp(g_dir / "runc3" / "chart_stats.csv") == csv);
  }

  SUBCASE("transfer reruns are byte-identical") {
    REQUIRE(run("transfer --source s1.json --source s2.json "
                "--input unlab.conllu --method lop --out m1.json "
                "--out-dir runt1") == 0);
    REQUIRE(run("transfer --source s1.json --source s2.json "
                "--input unlab.conllu --method lop --out m2.json "
                "--out-dir runt2") == 0);
    CHECK(slurp(g_dir / "m1.json") == slurp(g_dir / "m2.json"));
  }

  SUBCASE("learn-alphas, kl, mv-baseline, predict, evaluate") {
    REQUIRE(run("learn-alphas --source s1.json --source s2.json "
                "--labelled t1.conllu --out al.json --out-dir runl") == 0);
    auto alphas = nlohmann::json::parse(slurp(g_dir / "al.json"))["alphas"];
    REQUIRE(alphas.size() == 2);
    double sum = alphas[0].get<double>() + alphas[1].get<double>();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    REQUIRE(run("kl --source s1.json --source s2.json --alphas al.json "
                "--labelled t1.conllu --out-dir runk") == 0);
    CHECK(nlohmann::json::parse(slurp(g_dir / "runk" / "kl.json"))["pool_kl"]
              .get<double>() >= 0.0);

    REQUIRE(run("synth --task tagging --num-sentences 20 --seed 10 "
                "--out test.conllu --out-dir runp") == 0);
    REQUIRE(run("mv-baseline --source s1.json --source s2.json "
                "--input test.conllu --out mv.conllu --out-dir runm") == 0);
    REQUIRE(run("evaluate --task tagging --pred mv.conllu --gold test.conllu "
                "--out-dir runm") == 0);
    CHECK(nlohmann::json::parse(slurp(g_dir / "runm" / "evaluation.json"))
              ["accuracy"]
                  .get<double>() > 0.8);

    REQUIRE(run("transfer --source s1.json --source s2.json "
                "--input unlab.conllu --method lop --alphas al.json "
                "--out tgt.json --out-dir runt3") == 0);
    REQUIRE(run("predict --model tgt.json --input test.conllu "
                "--out pred.conllu --out-dir runpr") == 0);
    REQUIRE(run("evaluate --task tagging --pred pred.conllu "
                "--gold test.conllu --out-dir runpr") == 0);
    CHECK(nlohmann::json::parse(slurp(g_dir / "runpr" / "evaluation.json"))
              ["accuracy"]
                  .get<double>() > 0.8);
  }
}

TEST_CASE("build-charts on a two-token fixture with one confident source") {
  // Gold-supervised training on clean data makes the source confident, so
  // a moderate threshold keeps exactly the 1-best sequence.
  REQUIRE(run("synth --task tagging --num-sentences 120 --seed 11 "
              "--out ctrain.conllu --out-dir runf") == 0);
  REQUIRE(run("train-source --task tagging --train ctrain.conllu --eta 0.05 "
              "--epochs 15 --out conf.json --out-dir runf") == 0);
  dump(g_dir / "two.conllu",
       "# sent_id = two\n"
       "1\tNw1\tNOUN\tNOUN\t_\t_\t_\t_\t_\t_\n"
       "2\tVw2\tVERB\tVERB\t_\t_\t_\t_\t_\t_\n"
       "\n");
  REQUIRE(run("build-charts --source conf.json --input two.conllu "
              "--method lop --sigma 0.5 --out-dir runf2") == 0);
  std::string csv = slurp(g_dir / "runf2" / "chart_stats.csv");
  auto second_line = csv.substr(csv.find('\n') + 1);
  CHECK(second_line.rfind("two,1,1,", 0) == 0);
}

TEST_CASE("config file values are used and flags override them") {
  dump(g_dir / "cfg.json",
       R"({"task":"tagging","num_sentences":7,"seed":3,"out":"cfg_a.conllu","out_dir":"runcfg"})");
  CHECK(run("synth --config cfg.json") == 0);
  std::string a = slurp(g_dir / "cfg_a.conllu");
  CHECK(std::count(a.begin(), a.end(), '\n') > 7);
  auto manifest =
      nlohmann::json::parse(slurp(g_dir / "runcfg" / "manifest.json"));
  CHECK(manifest["config"]["num_sentences"] == 7);
  // Flag beats file.
  CHECK(run("synth --config cfg.json --num-sentences 3 --out cfg_b.conllu") ==
        0);
  std::string b = slurp(g_dir / "cfg_b.conllu");
  CHECK(std::count(b.begin(), b.end(), '\n') <
        std::count(a.begin(), a.end(), '\n'));
}
