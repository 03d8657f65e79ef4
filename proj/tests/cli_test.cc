// Copyright 2026 The rtqec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.h"
#include "rtqec/dataset.h"
#include "rtqec/qlstm.h"

namespace rtqec::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out;
    std::string err;
    nlohmann::json json() const {
        return nlohmann::json::parse(out);
    }
};

Result qecrt(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qecrt_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        fs::remove_all(dir_);
    }
    std::string path(const std::string& name) const {
        return (dir_ / name).string();
    }
    fs::path dir_;
};

TEST_F(CliTest, budget_defaults) {
    auto r = qecrt({"budget", "--json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto j = r.json();
    EXPECT_EQ(j["decoder_subtotal_ns"], 148);
    EXPECT_EQ(j["electronics_subtotal_ns"], 180);
    EXPECT_EQ(j["total_ns"], 550);
    EXPECT_EQ(j["feasible"], true);
    EXPECT_EQ(j["manifest"]["command"], "budget");
    auto text = qecrt({"budget"});
    EXPECT_NE(text.out.find("Total                    550 ns"), std::string::npos);
}

TEST_F(CliTest, budget_delay_and_overrides) {
    auto late = qecrt({"budget", "--delay", "500", "--json"}).json();
    EXPECT_EQ(late["feasible"], false);
    EXPECT_EQ(late["slack_ns"], -50);
    EXPECT_EQ(qecrt({"budget", "--delay", "549", "--json"}).json()["feasible"], false);
    auto slow = qecrt({"budget", "--set", "nn_core_ns=200", "--json"}).json();
    EXPECT_EQ(slow["decoder_subtotal_ns"], 224);
    EXPECT_EQ(slow["total_ns"], 626);
    EXPECT_EQ(qecrt({"budget", "--set", "nn_core=1"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"budget", "--set", "nn_core_ns=-1"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"budget", "--set", "nn_core_ns"}).code, kExitUsage);
    std::ofstream(path("b.json")) << R"({"dac_ns": 0})";
    EXPECT_EQ(qecrt({"budget", "--budget-file", path("b.json"), "--json"}).json()["total_ns"], 510);
    auto fast = qecrt({"budget", "--cycle", "150", "--json"}).json();
    EXPECT_EQ(fast["backlog"]["backlog_per_round_ns"], 34);
}

TEST_F(CliTest, scale_table) {
    auto r = qecrt({"scale", "--json"});
    ASSERT_EQ(r.code, kExitOk);
    auto j = r.json();
    ASSERT_EQ(j["rows"].size(), 8u);
    EXPECT_EQ(j["rows"][0]["p_lstm"], 4736);
    EXPECT_EQ(j["rows"][0]["dsp"], 399);
    EXPECT_EQ(j["max_supported_distance"]["single"], 15);
    EXPECT_EQ(j["max_supported_distance"]["dual"], 11);
    auto one = qecrt({"scale", "--distances", "3"});
    EXPECT_EQ(one.out, "d,dim_x,h,p_lstm,dsp,utilization_pct,latency_ns\n3,4,32,4736,399,3.2,124\n");
    EXPECT_EQ(qecrt({"scale", "--distances", "4"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"scale", "--distances", "3,x"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"scale", "--format", "xml"}).code, kExitUsage);
    EXPECT_NE(qecrt({"scale", "--format", "md"}).out.find("| 13 | 84 | 139 |"), std::string::npos);
    auto none = qecrt({"scale", "--capacity", "0", "--json"}).json();
    EXPECT_TRUE(none["max_supported_distance"]["single"].is_null());
}

TEST_F(CliTest, usage_errors) {
    EXPECT_EQ(qecrt({}).code, kExitUsage);
    EXPECT_EQ(qecrt({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"--help"}).code, kExitOk);
    auto help = qecrt({"evaluate", "--help"});
    EXPECT_EQ(help.code, kExitOk);
    EXPECT_NE(help.out.find("n,F,err,P,shots,successes"), std::string::npos);
    EXPECT_EQ(qecrt({"budget", "--delay", "abc"}).code, kExitUsage);
}

TEST_F(CliTest, simulate_flags) {
    auto conflict = qecrt({"simulate", "--basis", "X", "--state", "0", "--out", path("a.ds")});
    EXPECT_EQ(conflict.code, kExitUsage);
    EXPECT_NE(conflict.err.find("conflicts"), std::string::npos);
    EXPECT_EQ(qecrt({"simulate", "--state", "1", "--out", path("a.ds")}).code, kExitUsage);
    EXPECT_EQ(qecrt({"simulate", "--inject", "D10:X:40", "--out", path("a.ds")}).code, kExitUsage);
    EXPECT_EQ(qecrt({"simulate", "--inject", "D2:Y:40", "--out", path("a.ds")}).code, kExitUsage);
    EXPECT_EQ(qecrt({"simulate", "-r", "3", "--inject", "D2:X:40:round-5", "--out", path("a.ds")}).code, kExitUsage);
    EXPECT_EQ(qecrt({"simulate", "--distance", "4", "--out", path("a.ds")}).code, kExitUsage);
    EXPECT_EQ(qecrt({"simulate", "-n", "5"}).code, kExitUsage);  // no --out
    EXPECT_FALSE(fs::exists(path("a.ds")));

    auto ok = qecrt({"simulate", "-r", "4", "-n", "50", "--seed", "3", "--inject", "D2:X:40deg:each-round", "--out",
                     path("a.ds"), "--defects", path("a.df"), "--json"});
    ASSERT_EQ(ok.code, kExitOk) << ok.err;
    auto m = ok.json()["manifest"];
    EXPECT_EQ(m["config"]["seed"], 3);
    EXPECT_EQ(m["config"]["injections"].size(), 1u);
    DatasetHeader h;
    auto records = import_dataset(path("a.ds"), &h);
    EXPECT_EQ(records.size(), 50u);
    EXPECT_EQ(h.rounds, 4);
    EXPECT_EQ(import_defects(path("a.df")).size(), 50u);
    EXPECT_TRUE(fs::exists(path("a.ds.manifest.json")));
}

TEST_F(CliTest, simulate_is_reproducible) {
    ASSERT_EQ(qecrt({"simulate", "-r", "6", "-n", "700", "--seed", "9", "-j", "1", "--out", path("a.ds")}).code, 0);
    ASSERT_EQ(qecrt({"simulate", "-r", "6", "-n", "700", "--seed", "9", "-j", "8", "--out", path("b.ds")}).code, 0);
    EXPECT_EQ(slurp(path("a.ds")), slurp(path("b.ds")));
    ASSERT_EQ(qecrt({"simulate", "--config", path("a.ds.manifest.json"), "--out", path("c.ds")}).code, 0);
    EXPECT_EQ(slurp(path("a.ds")), slurp(path("c.ds")));
    // Without --seed a fresh seed is drawn and recorded.
    auto fresh = qecrt({"simulate", "-n", "5", "-r", "2", "--out", path("d.ds"), "--json"}).json();
    const uint64_t seed = fresh["manifest"]["config"]["seed"];
    ASSERT_EQ(qecrt({"simulate", "-n", "5", "-r", "2", "--seed", std::to_string(seed), "--out", path("e.ds")}).code, 0);
    EXPECT_EQ(slurp(path("d.ds")), slurp(path("e.ds")));
}

TEST_F(CliTest, evaluate_noiseless_is_perfect) {
    std::ofstream(path("zero.json")) << R"({"p1": 0, "p2": 0, "p_idle": 0, "p_meas": 0})";
    std::ofstream(path("prior.json")) << R"({"p1": 0.001, "p2": 0.005, "p_idle": 0.002, "p_meas": 0.01})";
    // Noiseless shots carry no defects, so even an edgeless all-zero prior
    // decodes them.
    for (const char* prior : {"zero.json", "prior.json"}) {
        auto r = qecrt({"evaluate", "-r", "3", "-n", "40", "--seed", "1", "--noise-file", path("zero.json"), "--prior-file",
                        path(prior), "--final-pfu", "--json"});
        ASSERT_EQ(r.code, kExitOk) << r.err << r.out;
        for (const auto& p : r.json()["results"][0]["points"]) EXPECT_EQ(p["F"], 1.0);
    }
}

TEST_F(CliTest, evaluate_outputs_and_replay) {
    auto r = qecrt({"evaluate", "-r", "3", "-n", "200", "--seed", "5", "--decoder", "none,mwpm", "--final-pfu", "-m",
                    "1", "--out-csv", path("e.csv"), "--out-json", path("e.json"), "--plot", path("e.svg"), "-j", "1"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const std::string csv = slurp(path("e.csv"));
    EXPECT_EQ(csv.rfind("decoder,n,F,err,P,shots,successes\n", 0), 0u);
    EXPECT_NE(csv.find("\nmwpm,3,"), std::string::npos);
    EXPECT_NE(r.out.find("F[none]\tF[mwpm]"), std::string::npos);
    EXPECT_EQ(slurp(path("e.svg")).rfind("<svg", 0), 0u);
    auto summary = nlohmann::json::parse(slurp(path("e.json")));
    EXPECT_EQ(summary["results"].size(), 2u);
    EXPECT_EQ(summary["feasibility"]["feasible"], true);

    ASSERT_EQ(qecrt({"evaluate", "--config", path("e.csv.manifest.json"), "--out-csv", path("r.csv"), "-j", "8"}).code,
              0);
    EXPECT_EQ(slurp(path("r.csv")), csv);

    // A plain LoopConfig file works as --config too.
    std::ofstream(path("loop.json")) << R"({"rounds": 2, "decoder": "none", "state": "-"})";
    auto c = qecrt({"evaluate", "--config", path("loop.json"), "-n", "10", "--seed", "0", "--json"});
    ASSERT_EQ(c.code, kExitOk) << c.err;
    EXPECT_EQ(c.json()["manifest"]["config"]["loop"]["state"], "-");
    std::ofstream(path("bad.json")) << R"({"rounds": 2, "colour": "red"})";
    EXPECT_EQ(qecrt({"evaluate", "--config", path("bad.json")}).code, kExitUsage);
}

TEST_F(CliTest, evaluate_validation) {
    auto nn = qecrt({"evaluate", "--decoder", "nn", "-r", "2", "--json"});
    EXPECT_EQ(nn.code, kExitUsage);
    EXPECT_EQ(nn.json()["ok"], false);
    EXPECT_NE(nn.err.find("weight"), std::string::npos);
    EXPECT_EQ(qecrt({"evaluate", "--decoder", "uf"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"evaluate", "--state", "+", "--basis", "Z"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"evaluate", "-r", "3", "--round-values", "4"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"evaluate", "--weights-x", path("missing.qecnw"), "--weights-z", path("missing.qecnw"),
                     "--decoder", "nn", "-r", "1", "-n", "1"})
                  .code,
              kExitUsage);
}

TEST_F(CliTest, evaluate_nn_weights) {
    save_weights(QLstmWeights::zeros(4, 32, StabilizerType::X), path("x.qecnw"));
    save_weights(QLstmWeights::zeros(4, 32, StabilizerType::Z), path("z.qecnw"));
    // Zero weights never flag a flip, so the NN loop behaves like no decoder.
    auto nn = qecrt({"evaluate", "--decoder", "nn,none", "--weights-x", path("x.qecnw"), "--weights-z", path("z.qecnw"),
                     "-r", "3", "-n", "300", "--seed", "2", "--json"});
    ASSERT_EQ(nn.code, kExitOk) << nn.err;
    auto res = nn.json()["results"];
    EXPECT_EQ(res[0]["points"], res[1]["points"]);
    // Swapped files are rejected.
    auto swapped = qecrt({"evaluate", "--decoder", "nn", "--weights-x", path("z.qecnw"), "--weights-z", path("x.qecnw"),
                          "-r", "1", "-n", "1"});
    EXPECT_EQ(swapped.code, kExitUsage);
}

TEST_F(CliTest, evaluate_datasets) {
    for (const char* r : {"2", "4", "6"}) {
        ASSERT_EQ(qecrt({"simulate", "-r", r, "-n", "300", "--seed", "8", "--out", path(std::string("d") + r + ".ds")}).code,
                  0);
    }
    auto e = qecrt({"evaluate", "--dataset", path("d6.ds"), "--dataset", path("d2.ds"), "--dataset", path("d4.ds"),
                    "--decoder", "mwpm,none", "--json"});
    ASSERT_EQ(e.code, kExitOk) << e.err;
    auto res = e.json()["results"];
    ASSERT_EQ(res[0]["points"].size(), 3u);
    EXPECT_EQ(res[0]["points"][0]["n"], 2);
    EXPECT_EQ(res[0]["points"][2]["n"], 6);
    EXPECT_EQ(res[0]["fit"]["valid"], true);
    EXPECT_GE(res[0]["points"][2]["F"].get<double>(), res[1]["points"][2]["F"].get<double>());
    EXPECT_EQ(qecrt({"evaluate", "--dataset", path("d2.ds"), "--distance", "5"}).code, kExitUsage);
    EXPECT_EQ(qecrt({"evaluate", "--dataset", path("d2.ds"), "--basis", "X"}).code, kExitUsage);
}

}  // namespace
}  // namespace rtqec::cli
