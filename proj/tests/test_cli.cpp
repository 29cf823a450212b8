#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#ifndef SDCA_CLI_PATH
#error "SDCA_CLI_PATH must point at the built command-line binary"
#endif

namespace {

int run(const std::string& args) {
  const std::string cmd =
      std::string(SDCA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_capture(const std::string& args, std::string& output) {
  const std::string out_path = "tmp_cli_stdout.txt";
  const std::string cmd = std::string(SDCA_CLI_PATH) + " " + args + " > " +
                          out_path + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  output = ss.str();
  std::remove(out_path.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

struct FileGuard {
  std::vector<std::string> paths;
  ~FileGuard() {
    for (const auto& p : paths) std::remove(p.c_str());
  }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with status one") {
    CHECK(run("") == 1);                       // a subcommand is required
    CHECK(run("--help") == 0);
    CHECK(run("train --help") == 0);
    CHECK(run("frobnicate") == 1);             // unknown subcommand
    CHECK(run("train --no-such-flag") == 1);   // unknown option
    CHECK(run("gen-synthetic --out x --n-train -5") == 1);
  }

  TEST_CASE("missing data files exit with status two") {
    CHECK(run("train --train no_such.libsvm --model tmp_m.bin "
              "--loss multi-svm --c 1") == 2);
    CHECK(run("predict --model no_such_model.bin --data also_missing.libsvm") ==
          2);
  }

  TEST_CASE("config errors exit with status one") {
    FileGuard guard;
    guard.paths = {"tmp_cfg.train.libsvm", "tmp_cfg.val.libsvm",
                   "tmp_cfg.test.libsvm", "tmp_cfg_model.bin"};
    REQUIRE(run("gen-synthetic --out tmp_cfg --n-train 30 --n-val 3 "
                "--n-test 3 --seed 1") == 0);
    // Unknown loss.
    CHECK(run("train --train tmp_cfg.train.libsvm --model tmp_cfg_model.bin "
              "--loss nope --c 1") == 1);
    // Both cost parameterizations at once (rejected at parse time).
    CHECK(run("train --train tmp_cfg.train.libsvm --model tmp_cfg_model.bin "
              "--loss multi-svm --c 1 --lambda 0.1") == 1);
    // Neither cost parameterization.
    CHECK(run("train --train tmp_cfg.train.libsvm --model tmp_cfg_model.bin "
              "--loss multi-svm") == 1);
    // Negative smoothing (rejected at parse time).
    CHECK(run("train --train tmp_cfg.train.libsvm --model tmp_cfg_model.bin "
              "--loss multi-svm --c 1 --gamma -2") == 1);
    // k too large for three classes.
    CHECK(run("train --train tmp_cfg.train.libsvm --model tmp_cfg_model.bin "
              "--loss topk-svm-a --k 3 --c 1") == 1);
    // Malformed kernel spec.
    CHECK(run("train --train tmp_cfg.train.libsvm --model tmp_cfg_model.bin "
              "--loss multi-svm --c 1 --kernel rbf:-1") == 1);
  }

  TEST_CASE("synthetic generation is deterministic per seed") {
    FileGuard guard;
    guard.paths = {"tmp_gen_a.train.libsvm", "tmp_gen_a.val.libsvm",
                   "tmp_gen_a.test.libsvm", "tmp_gen_b.train.libsvm",
                   "tmp_gen_b.val.libsvm",  "tmp_gen_b.test.libsvm",
                   "tmp_gen_c.train.libsvm", "tmp_gen_c.val.libsvm",
                   "tmp_gen_c.test.libsvm"};
    REQUIRE(run("gen-synthetic --out tmp_gen_a --n-train 45 --n-val 15 "
                "--n-test 15 --seed 7") == 0);
    REQUIRE(run("gen-synthetic --out tmp_gen_b --n-train 45 --n-val 15 "
                "--n-test 15 --seed 7") == 0);
    REQUIRE(run("gen-synthetic --out tmp_gen_c --n-train 45 --n-val 15 "
                "--n-test 15 --seed 8") == 0);
    CHECK(slurp("tmp_gen_a.train.libsvm") == slurp("tmp_gen_b.train.libsvm"));
    CHECK(slurp("tmp_gen_a.test.libsvm") == slurp("tmp_gen_b.test.libsvm"));
    CHECK(slurp("tmp_gen_a.train.libsvm") != slurp("tmp_gen_c.train.libsvm"));
    // 45 train examples over three classes.
    std::istringstream lines(slurp("tmp_gen_a.train.libsvm"));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
      if (!line.empty()) ++count;
    }
    CHECK(count == 45);
  }

  TEST_CASE("train, predict, and evaluate fit together") {
    FileGuard guard;
    guard.paths = {"tmp_pipe.train.libsvm", "tmp_pipe.val.libsvm",
                   "tmp_pipe.test.libsvm", "tmp_pipe_model.bin",
                   "tmp_pipe_pred.csv",    "tmp_pipe_report.txt",
                   "tmp_pipe_gaps.csv"};
    REQUIRE(run("gen-synthetic --out tmp_pipe --n-train 60 --n-val 30 "
                "--n-test 30 --seed 3") == 0);

    std::string out;
    REQUIRE(run_capture("train --train tmp_pipe.train.libsvm "
                        "--model tmp_pipe_model.bin --loss multi-svm --c 1 "
                        "--eps 1e-3 --gap-log tmp_pipe_gaps.csv",
                        out) == 0);
    CHECK(contains(out, "examples 60"));
    CHECK(contains(out, "classes 3"));
    CHECK(contains(out, "loss multi-svm"));
    CHECK(contains(out, "gap "));

    // The gap log is a CSV with a header.
    CHECK(contains(slurp("tmp_pipe_gaps.csv"), "epoch,primal,dual,gap"));

    REQUIRE(run("predict --model tmp_pipe_model.bin "
                "--data tmp_pipe.test.libsvm --output tmp_pipe_pred.csv "
                "--topk 2") == 0);
    const std::string pred = slurp("tmp_pipe_pred.csv");
    std::istringstream pred_lines(pred);
    std::string header;
    REQUIRE(std::getline(pred_lines, header));
    CHECK(header == "score_1,score_2,score_3,top1,top2");
    int rows = 0;
    std::string line;
    while (std::getline(pred_lines, line)) {
      if (!line.empty()) ++rows;
    }
    CHECK(rows == 30);

    REQUIRE(run_capture("evaluate --model tmp_pipe_model.bin "
                        "--data tmp_pipe.test.libsvm --ks 1,2 "
                        "--report tmp_pipe_report.txt",
                        out) == 0);
    CHECK(contains(out, "examples 30"));
    CHECK(contains(out, "top1_accuracy "));
    CHECK(contains(out, "top2_accuracy "));
    // The report file carries the same lines.
    CHECK(contains(slurp("tmp_pipe_report.txt"), "top1_accuracy "));

    // Out-of-range ks are rejected.
    CHECK(run("evaluate --model tmp_pipe_model.bin "
              "--data tmp_pipe.test.libsvm --ks 0") == 1);
    CHECK(run("evaluate --model tmp_pipe_model.bin "
              "--data tmp_pipe.test.libsvm --ks 4") == 1);
  }

  TEST_CASE("rbf kernel models ship their own features") {
    FileGuard guard;
    guard.paths = {"tmp_rbf.train.libsvm", "tmp_rbf.val.libsvm",
                   "tmp_rbf.test.libsvm", "tmp_rbf_model.bin"};
    REQUIRE(run("gen-synthetic --out tmp_rbf --n-train 45 --n-val 15 "
                "--n-test 15 --seed 11") == 0);
    REQUIRE(run("train --train tmp_rbf.train.libsvm --model tmp_rbf_model.bin "
                "--loss softmax --c 10 --kernel rbf:2 --eps 1e-3") == 0);
    std::string out;
    CHECK(run_capture("evaluate --model tmp_rbf_model.bin "
                      "--data tmp_rbf.test.libsvm --ks 1",
                      out) == 0);
    CHECK(contains(out, "top1_accuracy "));
  }

  TEST_CASE("the truncated entropy rejects kernel training") {
    FileGuard guard;
    guard.paths = {"tmp_tr.train.libsvm", "tmp_tr.val.libsvm",
                   "tmp_tr.test.libsvm", "tmp_tr_model.bin"};
    REQUIRE(run("gen-synthetic --out tmp_tr --n-train 30 --n-val 3 "
                "--n-test 3 --seed 2") == 0);
    CHECK(run("train --train tmp_tr.train.libsvm --model tmp_tr_model.bin "
              "--loss topk-entropy-truncated --k 2 --c 1 --kernel rbf:1") == 1);
    // Linear training works.
    CHECK(run("train --train tmp_tr.train.libsvm --model tmp_tr_model.bin "
              "--loss topk-entropy-truncated --k 2 --c 1 --eps 1e-3") == 0);
  }

  TEST_CASE("cross-validation reports a best cost") {
    FileGuard guard;
    guard.paths = {"tmp_cv.train.libsvm", "tmp_cv.val.libsvm",
                   "tmp_cv.test.libsvm"};
    REQUIRE(run("gen-synthetic --out tmp_cv --n-train 45 --n-val 3 "
                "--n-test 3 --seed 13") == 0);
    std::string out;
    REQUIRE(run_capture("cv --data tmp_cv.train.libsvm --loss multi-svm "
                        "--c-grid 0.5,2 --folds 3 --metric top1 --eps 1e-2 "
                        "--seed 5 --jobs 2",
                        out) == 0);
    CHECK(contains(out, "metric top1"));
    CHECK(contains(out, "folds 3"));
    CHECK(contains(out, "best_c "));
    CHECK(contains(out, "best_mean "));
    // One grid line per cost.
    CHECK(contains(out, "c 0.5 "));
    CHECK(contains(out, "c 2 "));

    // Identical invocations give identical reports.
    std::string again;
    REQUIRE(run_capture("cv --data tmp_cv.train.libsvm --loss multi-svm "
                        "--c-grid 0.5,2 --folds 3 --metric top1 --eps 1e-2 "
                        "--seed 5 --jobs 2",
                        again) == 0);
    CHECK(out == again);

    // Unknown metric name.
    CHECK(run("cv --data tmp_cv.train.libsvm --loss multi-svm "
              "--c-grid 1 --metric nope") == 1);
  }
}
