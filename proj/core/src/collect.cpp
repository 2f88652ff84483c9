#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "avground/error.hpp"
#include "avground/harness.hpp"
#include "httplib.h"
#include "json.hpp"
#include "text_util.hpp"

namespace avground {

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw InvalidArgument("endpoint must be an http:// URL: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Client make_client(const Endpoint& ep, std::chrono::duration<double> timeout) {
  httplib::Client cli(ep.base);
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  cli.set_connection_timeout(us);
  cli.set_read_timeout(us);
  cli.set_write_timeout(us);
  return cli;
}

// Successful records from a previous run. A torn trailing line from a crash
// is ignored.
std::vector<PredictionRecord> load_checkpoint(const std::filesystem::path& path) {
  std::vector<PredictionRecord> done;
  std::ifstream in(path, std::ios::binary);
  if (!in) return done;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::istringstream one(line);
    try {
      auto recs = parse_predictions(one);
      for (auto& r : recs) {
        if (!r.error && seen.insert(r.qa_id).second) done.push_back(std::move(r));
      }
    } catch (const SchemaError&) {
    }
  }
  return done;
}

}  // namespace

std::optional<std::string> default_endpoint() {
  if (const char* v = std::getenv("CHRONUS_ENDPOINT"); v && *v) return std::string(v);
  return std::nullopt;
}

CollectStats collect_predictions(std::span<const QaPair> qa, const std::filesystem::path& out_path,
                                 const CollectOptions& options) {
  const Endpoint ep = split_endpoint(options.endpoint);
  const std::size_t concurrency = std::max<std::size_t>(1, options.concurrency);

  CollectStats stats;
  stats.total = qa.size();

  auto done = load_checkpoint(out_path);
  std::set<std::string> done_ids;
  for (const auto& r : done) done_ids.insert(r.qa_id);
  std::vector<const QaPair*> pending;
  for (const auto& q : qa) {
    if (done_ids.count(q.qa_id)) {
      ++stats.skipped;
    } else {
      pending.push_back(&q);
    }
  }

  if (!pending.empty()) {
    // Reachability probe: any HTTP response counts, only a transport error
    // means the endpoint is down.
    bool reachable = false;
    for (std::size_t attempt = 0; attempt <= options.retries && !reachable; ++attempt) {
      auto cli = make_client(ep, options.timeout);
      reachable = static_cast<bool>(cli.Get(ep.path));
    }
    if (!reachable) throw EndpointUnreachable("cannot reach endpoint " + options.endpoint);
  }

  // Rewrite the checkpoint with successful records only, so retried qa_ids
  // never appear twice.
  {
    const auto tmp = std::filesystem::path(out_path.string() + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    for (const auto& r : done) out << serialize_prediction(r) << '\n';
    out.close();
    std::filesystem::rename(tmp, out_path);
  }
  if (pending.empty()) return stats;

  std::ofstream out(out_path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + out_path.string());
  std::mutex write_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> ok{0}, failed{0};

  auto worker = [&] {
    auto cli = make_client(ep, options.timeout);
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      const QaPair& q = *pending[i];
      nlohmann::ordered_json body = {{"question", q.question}};
      if (q.video_ref) body["video_ref"] = *q.video_ref;
      if (q.audio_ref) body["audio_ref"] = *q.audio_ref;

      PredictionRecord rec{q.qa_id, "", std::nullopt, std::nullopt};
      std::string error;
      for (std::size_t attempt = 0; attempt <= options.retries; ++attempt) {
        auto res = cli.Post(ep.path, body.dump(), "application/json");
        if (!res) {
          error = "transport error: " + httplib::to_string(res.error());
          continue;
        }
        if (res->status != 200) {
          error = "HTTP " + std::to_string(res->status);
          continue;
        }
        try {
          auto reply = nlohmann::json::parse(res->body);
          rec.prediction = reply.at("prediction").get<std::string>();
          if (auto it = reply.find("decode"); it != reply.end() && !it->is_null()) {
            rec.decode = it->dump();
          }
          error.clear();
        } catch (const nlohmann::json::exception& e) {
          error = std::string("bad response: ") + e.what();
        }
        break;
      }
      if (!error.empty()) {
        rec.prediction.clear();
        rec.error = error;
        ++failed;
      } else {
        ++ok;
      }
      std::lock_guard lock(write_mutex);
      out << serialize_prediction(rec) << '\n';
      out.flush();
    }
  };

  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(concurrency, pending.size()); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  stats.succeeded = ok;
  stats.failed = failed;
  return stats;
}

}  // namespace avground
