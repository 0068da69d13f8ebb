#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tagseek/records.hpp"

namespace tagseek {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoreCounts {
  std::int64_t urls_crawled = 0;
  std::int64_t domains_crawled = 0;
  std::int64_t filtered_urls = 0;
  std::int64_t poisoned_domains = 0;

  bool operator==(const StoreCounts&) const = default;
};

struct StoreOptions {
  bool fsync_each_append = true;
  // Write a snapshot after this many journal lines; 0 disables automatic
  // snapshots (one is still written on clean close).
  std::int64_t snapshot_every = 4096;
};

// Durable store backed by a line-delimited append-only journal. One JSON
// object per line; the first line is a version header. A snapshot file
// captures the materialized state plus the journal offset it covers, so
// reopening replays only the tail.
//
// Single writer, enforced with an exclusive flock on the journal. All
// mutation goes through append/set_* which write and fsync the journal
// line before the in-memory indexes are touched.
class Store {
 public:
  enum class Append { Ok, AlreadyKnown };

  explicit Store(const std::filesystem::path& dir, StoreOptions opts = {});
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // Inserts; a second record with the same key reports AlreadyKnown and
  // writes nothing.
  Append append(const UrlRecord& r);
  Append append(const TagRecord& r);
  // Upserts by collapsed_domain.
  void append(const DomainVerdict& v);
  // Always appended.
  void append(const SearchEvent& e);

  // State transitions, journaled as their own events.
  void set_url_status(const std::string& url, UrlStatus status,
                      std::optional<UtcMillis> checked_at);
  void set_url_tagged(const std::string& url, bool tagged);
  // Distinct cleaned-text tokens of a fetched page, kept for the
  // ex-post-facto tag frequency scan.
  void set_url_tokens(const std::string& url, std::vector<std::string> tokens);
  void set_tag_searched(const std::string& tag, const std::string& source_url);

  // Frontier queries, FIFO by insertion order. Returned records are not
  // marked consumed; callers mark progress via the set_* transitions.
  std::vector<UrlRecord> frontier_urls(std::size_t limit) const;
  std::vector<TagRecord> frontier_tags(std::size_t limit) const;
  std::vector<UrlRecord> filtered_urls_needing_tags(std::size_t limit) const;
  std::vector<std::string> domains_with_expired_verdict(UtcMillis now) const;

  bool contains_url(const std::string& url) const;
  std::optional<UrlRecord> find_url(const std::string& url) const;
  std::optional<DomainVerdict> find_verdict(const std::string& domain) const;

  StoreCounts counts() const;

  std::vector<UrlRecord> all_urls() const;
  std::vector<TagRecord> all_tags() const;
  std::vector<DomainVerdict> all_verdicts() const;
  std::vector<SearchEvent> all_search_events() const;
  std::vector<std::string> url_tokens(const std::string& url) const;

  // Compaction point; also invoked periodically and on close.
  void write_snapshot();

  std::int64_t journal_lines() const;

  static constexpr const char* kJournalName = "journal.ndjson";
  static constexpr const char* kSnapshotName = "snapshot.json";

 private:
  struct State {
    std::unordered_map<std::string, UrlRecord> urls;
    std::vector<std::string> url_order;
    std::unordered_map<std::string, std::vector<std::string>> url_tokens;
    std::unordered_map<std::string, TagRecord> tags;  // key: tag '\t' url
    std::vector<std::string> tag_order;
    std::unordered_map<std::string, DomainVerdict> verdicts;
    std::vector<SearchEvent> searches;
    std::unordered_set<std::string> domains_seen;
    std::int64_t filtered_count = 0;
    std::int64_t poisoned_count = 0;
  };

  void write_line(const nlohmann::json& j);
  void write_snapshot_locked();
  void maybe_snapshot_locked();
  void apply_event(const nlohmann::json& j, State& st) const;
  void recover(std::int64_t* out_lines);
  bool load_snapshot(std::int64_t journal_size);
  nlohmann::json state_to_json() const;
  static void state_from_json(const nlohmann::json& j, State& st);

  static std::string tag_key(const std::string& tag, const std::string& url) {
    return tag + "\t" + url;
  }

  std::filesystem::path dir_;
  StoreOptions opts_;
  int fd_ = -1;
  mutable std::mutex mu_;
  State st_;
  std::int64_t lines_ = 0;
  std::int64_t lines_at_snapshot_ = 0;
  std::int64_t replay_offset_ = 0;  // journal bytes covered by loaded snapshot
};

}  // namespace tagseek
