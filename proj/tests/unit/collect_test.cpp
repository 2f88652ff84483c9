#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "avground/error.hpp"
#include "avground/harness.hpp"
#include "httplib.h"
#include "json.hpp"
#include "synthetic.hpp"

namespace avground {
namespace {

namespace fs = std::filesystem;

// Echo model: answers with the question itself. Returns 500 for the one
// question passed to fail_on().
class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Get("/v1/answer", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });
    server_.Post("/v1/answer", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      const std::string q = body.at("question");
      bool fail = false;
      {
        std::lock_guard lock(mu_);
        questions_.push_back(q);
        if (body.contains("video_ref")) video_refs_.insert(body["video_ref"].get<std::string>());
        fail = !fail_marker_.empty() && q == fail_marker_;
      }
      if (fail) {
        res.status = 500;
        return;
      }
      nlohmann::json reply = {{"prediction", q},
                              {"decode", {{"temperature", 0.0}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/answer"; }
  void fail_on(std::string question) {
    std::lock_guard lock(mu_);
    fail_marker_ = std::move(question);
  }
  std::size_t requests() {
    std::lock_guard lock(mu_);
    return questions_.size();
  }
  std::set<std::string> video_refs() {
    std::lock_guard lock(mu_);
    return video_refs_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<std::string> questions_;
  std::set<std::string> video_refs_;
  std::string fail_marker_;
};

class CollectTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("avground_collect_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    qa_ = build_test_set(testing_support::synthetic_corpus(5, 12), 1);
    qa_[0].video_ref = "media/vid0.mp4";
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  std::vector<QaPair> qa_;
};

TEST_F(CollectTest, CollectsEveryQaOnce) {
  FakeEndpoint ep;
  CollectOptions opt;
  opt.endpoint = ep.url();
  opt.concurrency = 3;
  const auto out = dir_ / "pred.jsonl";
  const auto stats = collect_predictions(qa_, out, opt);
  EXPECT_EQ(stats.total, 30u);
  EXPECT_EQ(stats.succeeded, 30u);
  EXPECT_EQ(stats.failed, 0u);
  const auto preds = load_predictions(out);  // throws on duplicate qa_id
  ASSERT_EQ(preds.size(), 30u);
  std::map<std::string, std::string> questions;
  for (const auto& q : qa_) questions[q.qa_id] = q.question;
  for (const auto& p : preds) {
    EXPECT_EQ(p.prediction, questions.at(p.qa_id));
    EXPECT_EQ(p.decode, R"({"temperature":0.0})");
  }
  EXPECT_EQ(ep.video_refs(), (std::set<std::string>{"media/vid0.mp4"}));
  EXPECT_NO_THROW(evaluate(qa_, preds));
}

TEST_F(CollectTest, UnreachableEndpointFailsBeforeWriting) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }  // released: nothing listens there now
  CollectOptions opt;
  opt.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/answer";
  opt.timeout = std::chrono::duration<double>(0.5);
  opt.retries = 0;
  const auto out = dir_ / "pred.jsonl";
  EXPECT_THROW(collect_predictions(qa_, out, opt), EndpointUnreachable);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CollectTest, ResumeSkipsCollectedAndRetriesFailures) {
  FakeEndpoint ep;
  CollectOptions opt;
  opt.endpoint = ep.url();
  opt.retries = 0;
  const auto out = dir_ / "pred.jsonl";

  ep.fail_on(qa_[3].question);
  const auto first = collect_predictions(qa_, out, opt);
  EXPECT_EQ(first.failed, 1u);
  EXPECT_EQ(first.succeeded, 29u);
  // Simulate a crash that tore the last line.
  {
    std::ofstream app(out, std::ios::app);
    app << "{\"qa_id\": \"vid";
  }

  ep.fail_on("");
  const std::size_t before = ep.requests();
  const auto second = collect_predictions(qa_, out, opt);
  EXPECT_EQ(second.skipped, 29u);
  EXPECT_EQ(second.succeeded, 1u);
  EXPECT_EQ(ep.requests() - before, 1u);  // only the previously failed QA is posted
  const auto preds = load_predictions(out);
  EXPECT_EQ(preds.size(), 30u);
  for (const auto& p : preds) EXPECT_FALSE(p.error.has_value());

  const auto third = collect_predictions(qa_, out, opt);
  EXPECT_EQ(third.skipped, 30u);
  EXPECT_EQ(load_predictions(out).size(), 30u);
}

TEST_F(CollectTest, BadEndpointUrl) {
  CollectOptions opt;
  opt.endpoint = "ftp://example";
  EXPECT_THROW(collect_predictions(qa_, dir_ / "p.jsonl", opt), InvalidArgument);
}

TEST(DefaultEndpoint, ReadsEnvironment) {
  ::setenv("CHRONUS_ENDPOINT", "http://127.0.0.1:9/x", 1);
  EXPECT_EQ(default_endpoint(), "http://127.0.0.1:9/x");
  ::unsetenv("CHRONUS_ENDPOINT");
  EXPECT_FALSE(default_endpoint().has_value());
}

}  // namespace
}  // namespace avground
