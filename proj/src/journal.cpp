#include "tagseek/journal.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tagseek {

using nlohmann::json;

namespace {

constexpr int kJournalVersion = 1;

bool tag_token_valid(const std::string& t) {
  if (t.size() < 2) return false;
  for (char c : t)
    if (c < 'a' || c > 'z') return false;
  return true;
}

void check_url_record(const UrlRecord& r) {
  if (r.url.empty()) throw StoreError("UrlRecord with empty url");
  if ((r.status == UrlStatus::Filtered || r.status == UrlStatus::Unfiltered) &&
      !r.last_checked)
    throw StoreError("checked UrlRecord without last_checked: " + r.url);
}

void check_tag_record(const TagRecord& r) {
  if (!tag_token_valid(r.tag))
    throw StoreError("TagRecord tag must match [a-z]{2,}: '" + r.tag + "'");
  if (r.source_url.empty()) throw StoreError("TagRecord with empty source_url");
  if (r.weight < 0) throw StoreError("TagRecord with negative weight");
}

void check_verdict(const DomainVerdict& v) {
  if (v.collapsed_domain.empty()) throw StoreError("verdict with empty domain");
  if (v.expires_at <= v.decided_at)
    throw StoreError("verdict expires_at must be after decided_at");
  if (v.verdict == Verdict::Poisoned) {
    bool any = false;
    for (const auto& p : v.evidence)
      any |= p.outcome == ProbeResult::Outcome::Response && p.id_matched;
    if (!any)
      throw StoreError("poisoned verdict without a matched-ID response: " +
                       v.collapsed_domain);
  }
}

void check_search_event(const SearchEvent& e) {
  if (e.tag.empty()) throw StoreError("search event with empty tag");
  int expect = 1;
  for (const auto& [rank, url] : e.results) {
    if (rank != expect++)
      throw StoreError("search event ranks must be 1..n without gaps");
    (void)url;
  }
}

}  // namespace

Store::Store(const std::filesystem::path& dir, StoreOptions opts)
    : dir_(dir), opts_(opts) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StoreError("cannot create store dir: " + dir_.string());

  auto journal_path = dir_ / kJournalName;
  fd_ = ::open(journal_path.c_str(), O_RDWR | O_CREAT, 0644);
  if (fd_ < 0)
    throw StoreError("cannot open journal: " + std::string(strerror(errno)));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw StoreError("journal is locked by another writer: " +
                     journal_path.string());
  }
  recover(&lines_);
  lines_at_snapshot_ = lines_;
}

Store::~Store() {
  if (fd_ >= 0) {
    try {
      write_snapshot();
    } catch (...) {
      // best effort on close; journal remains authoritative
    }
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void Store::recover(std::int64_t* out_lines) {
  struct stat sb{};
  if (fstat(fd_, &sb) != 0) throw StoreError("fstat failed on journal");
  std::string content;
  content.resize(static_cast<std::size_t>(sb.st_size));
  ssize_t got = ::pread(fd_, content.data(), content.size(), 0);
  if (got < 0 || got != sb.st_size) throw StoreError("cannot read journal");

  if (content.empty()) {
    json header{{"type", "header"},
                {"format", "tagseek-journal"},
                {"version", kJournalVersion}};
    std::string line = header.dump() + "\n";
    if (::write(fd_, line.data(), line.size()) !=
        static_cast<ssize_t>(line.size()))
      throw StoreError("cannot write journal header");
    if (::fsync(fd_) != 0) throw StoreError("fsync failed");
    *out_lines = 1;
    return;
  }

  std::int64_t journal_size = sb.st_size;
  bool have_snapshot = load_snapshot(journal_size);

  std::int64_t lines = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  std::size_t good_end = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // partial tail from a crash
    std::string_view line(content.data() + pos, nl - pos);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (content.find('\n', nl + 1) == std::string::npos) break;  // torn tail
      throw StoreError("corrupt journal line before tail at byte " +
                       std::to_string(pos));
    }
    std::string type = j.value("type", "");
    if (!header_seen) {
      if (type != "header" || j.value("format", "") != "tagseek-journal")
        throw StoreError("journal header missing or unrecognized");
      if (j.value("version", 0) != kJournalVersion)
        throw StoreError("unsupported journal version");
      header_seen = true;
    } else if (static_cast<std::int64_t>(nl + 1) > replay_offset_) {
      // snapshot already covers everything before replay_offset_
      apply_event(j, st_);
    }
    ++lines;
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end < content.size()) {
    // drop the torn tail so future appends start on a clean line
    if (::ftruncate(fd_, static_cast<off_t>(good_end)) != 0)
      throw StoreError("cannot truncate torn journal tail");
  }
  if (::lseek(fd_, 0, SEEK_END) < 0) throw StoreError("lseek failed");
  (void)have_snapshot;
  *out_lines = lines;
}

bool Store::load_snapshot(std::int64_t journal_size) {
  auto path = dir_ / kSnapshotName;
  std::ifstream in(path);
  if (!in) return false;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return false;  // ignore damaged snapshot, full replay
  if (j.value("format", "") != "tagseek-snapshot") return false;
  std::int64_t covers = j.value("journal_bytes", static_cast<std::int64_t>(-1));
  if (covers < 0 || covers > journal_size) return false;
  State st;
  try {
    state_from_json(j.at("state"), st);
  } catch (const std::exception&) {
    return false;
  }
  st_ = std::move(st);
  replay_offset_ = covers;
  return true;
}

json Store::state_to_json() const {
  json urls = json::array();
  for (const auto& key : st_.url_order) urls.push_back(to_json(st_.urls.at(key)));
  json tags = json::array();
  for (const auto& key : st_.tag_order) tags.push_back(to_json(st_.tags.at(key)));
  json verdicts = json::array();
  for (const auto& [_, v] : st_.verdicts) verdicts.push_back(to_json(v));
  json searches = json::array();
  for (const auto& e : st_.searches) searches.push_back(to_json(e));
  json tokens = json::object();
  for (const auto& [url, toks] : st_.url_tokens) tokens[url] = toks;
  return json{{"urls", urls},
              {"tags", tags},
              {"verdicts", verdicts},
              {"searches", searches},
              {"url_tokens", tokens}};
}

void Store::state_from_json(const json& j, State& st) {
  for (const auto& u : j.at("urls")) {
    UrlRecord r = url_record_from_json(u);
    st.url_order.push_back(r.url);
    st.domains_seen.insert(r.collapsed_domain);
    if (r.status == UrlStatus::Filtered) ++st.filtered_count;
    st.urls.emplace(r.url, std::move(r));
  }
  for (const auto& t : j.at("tags")) {
    TagRecord r = tag_record_from_json(t);
    std::string key = tag_key(r.tag, r.source_url);
    st.tag_order.push_back(key);
    st.tags.emplace(std::move(key), std::move(r));
  }
  for (const auto& v : j.at("verdicts")) {
    DomainVerdict dv = domain_verdict_from_json(v);
    if (dv.verdict == Verdict::Poisoned) ++st.poisoned_count;
    st.verdicts.emplace(dv.collapsed_domain, std::move(dv));
  }
  for (const auto& e : j.at("searches"))
    st.searches.push_back(search_event_from_json(e));
  for (const auto& [url, toks] : j.at("url_tokens").items())
    st.url_tokens[url] = toks.get<std::vector<std::string>>();
}

void Store::write_snapshot() {
  std::lock_guard lock(mu_);
  write_snapshot_locked();
}

void Store::maybe_snapshot_locked() {
  if (opts_.snapshot_every > 0 &&
      lines_ - lines_at_snapshot_ >= opts_.snapshot_every)
    write_snapshot_locked();
}

void Store::write_snapshot_locked() {
  struct stat sb{};
  if (fstat(fd_, &sb) != 0) throw StoreError("fstat failed");
  json j{{"format", "tagseek-snapshot"},
         {"version", kJournalVersion},
         {"journal_bytes", static_cast<std::int64_t>(sb.st_size)},
         {"state", state_to_json()}};
  auto tmp = dir_ / (std::string(kSnapshotName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw StoreError("cannot write snapshot temp file");
    out << j.dump();
    out.flush();
    if (!out) throw StoreError("snapshot write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, dir_ / kSnapshotName, ec);
  if (ec) throw StoreError("snapshot rename failed: " + ec.message());
  lines_at_snapshot_ = lines_;
}

void Store::write_line(const json& j) {
  std::string line = j.dump();
  line.push_back('\n');
  if (::write(fd_, line.data(), line.size()) !=
      static_cast<ssize_t>(line.size()))
    throw StoreError("journal append failed: " + std::string(strerror(errno)));
  if (opts_.fsync_each_append && ::fsync(fd_) != 0)
    throw StoreError("fsync failed: " + std::string(strerror(errno)));
  ++lines_;
}

void Store::apply_event(const json& j, State& st) const {
  std::string type = j.value("type", "");
  if (type == "url") {
    UrlRecord r = url_record_from_json(j.at("record"));
    if (st.urls.count(r.url)) throw StoreError("replayed duplicate url");
    st.url_order.push_back(r.url);
    st.domains_seen.insert(r.collapsed_domain);
    if (r.status == UrlStatus::Filtered) ++st.filtered_count;
    st.urls.emplace(r.url, std::move(r));
  } else if (type == "tag") {
    TagRecord r = tag_record_from_json(j.at("record"));
    std::string key = tag_key(r.tag, r.source_url);
    if (st.tags.count(key)) throw StoreError("replayed duplicate tag");
    st.tag_order.push_back(key);
    st.tags.emplace(std::move(key), std::move(r));
  } else if (type == "verdict") {
    DomainVerdict v = domain_verdict_from_json(j.at("record"));
    auto it = st.verdicts.find(v.collapsed_domain);
    if (it != st.verdicts.end()) {
      if (it->second.verdict == Verdict::Poisoned) --st.poisoned_count;
      if (v.verdict == Verdict::Poisoned) ++st.poisoned_count;
      it->second = std::move(v);
    } else {
      if (v.verdict == Verdict::Poisoned) ++st.poisoned_count;
      st.verdicts.emplace(v.collapsed_domain, std::move(v));
    }
  } else if (type == "search") {
    st.searches.push_back(search_event_from_json(j.at("record")));
  } else if (type == "url.status") {
    auto it = st.urls.find(j.at("url").get<std::string>());
    if (it == st.urls.end()) throw StoreError("status update for unknown url");
    auto status = url_status_from_string(j.at("status").get<std::string>());
    if (!status) throw StoreError("bad status in journal");
    if (it->second.status == UrlStatus::Filtered) --st.filtered_count;
    if (*status == UrlStatus::Filtered) ++st.filtered_count;
    it->second.status = *status;
    if (j.contains("last_checked")) {
      auto lc = parse_utc(j.at("last_checked").get<std::string>());
      if (!lc) throw StoreError("bad last_checked in journal");
      it->second.last_checked = *lc;
    }
  } else if (type == "url.tagged") {
    auto it = st.urls.find(j.at("url").get<std::string>());
    if (it == st.urls.end()) throw StoreError("tagged update for unknown url");
    it->second.tags_extracted = j.at("tagged").get<bool>();
  } else if (type == "url.text") {
    std::string url = j.at("url").get<std::string>();
    if (!st.urls.count(url)) throw StoreError("text update for unknown url");
    st.url_tokens[url] = j.at("tokens").get<std::vector<std::string>>();
  } else if (type == "tag.searched") {
    std::string key = tag_key(j.at("tag").get<std::string>(),
                              j.at("source_url").get<std::string>());
    auto it = st.tags.find(key);
    if (it == st.tags.end()) throw StoreError("searched update for unknown tag");
    it->second.searched = true;
  } else {
    throw StoreError("unknown journal event type: " + type);
  }
}

Store::Append Store::append(const UrlRecord& r) {
  check_url_record(r);
  std::lock_guard lock(mu_);
  if (st_.urls.count(r.url)) return Append::AlreadyKnown;
  json j{{"type", "url"}, {"record", to_json(r)}};
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
  return Append::Ok;
}

Store::Append Store::append(const TagRecord& r) {
  check_tag_record(r);
  std::lock_guard lock(mu_);
  if (st_.tags.count(tag_key(r.tag, r.source_url))) return Append::AlreadyKnown;
  json j{{"type", "tag"}, {"record", to_json(r)}};
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
  return Append::Ok;
}

void Store::append(const DomainVerdict& v) {
  check_verdict(v);
  std::lock_guard lock(mu_);
  json j{{"type", "verdict"}, {"record", to_json(v)}};
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
}

void Store::append(const SearchEvent& e) {
  check_search_event(e);
  std::lock_guard lock(mu_);
  json j{{"type", "search"}, {"record", to_json(e)}};
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
}

void Store::set_url_status(const std::string& url, UrlStatus status,
                           std::optional<UtcMillis> checked_at) {
  std::lock_guard lock(mu_);
  if (!st_.urls.count(url)) throw StoreError("set_url_status: unknown url");
  json j{{"type", "url.status"}, {"url", url}, {"status", to_string(status)}};
  if (checked_at) j["last_checked"] = format_utc(*checked_at);
  if ((status == UrlStatus::Filtered || status == UrlStatus::Unfiltered) &&
      !checked_at && !st_.urls.at(url).last_checked)
    throw StoreError("checked status requires a check timestamp");
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
}

void Store::set_url_tagged(const std::string& url, bool tagged) {
  std::lock_guard lock(mu_);
  if (!st_.urls.count(url)) throw StoreError("set_url_tagged: unknown url");
  json j{{"type", "url.tagged"}, {"url", url}, {"tagged", tagged}};
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
}

void Store::set_url_tokens(const std::string& url,
                           std::vector<std::string> tokens) {
  std::lock_guard lock(mu_);
  if (!st_.urls.count(url)) throw StoreError("set_url_tokens: unknown url");
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  json j{{"type", "url.text"}, {"url", url}, {"tokens", tokens}};
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
}

void Store::set_tag_searched(const std::string& tag,
                             const std::string& source_url) {
  std::lock_guard lock(mu_);
  if (!st_.tags.count(tag_key(tag, source_url)))
    throw StoreError("set_tag_searched: unknown tag");
  json j{{"type", "tag.searched"}, {"tag", tag}, {"source_url", source_url}};
  write_line(j);
  apply_event(j, st_);
  maybe_snapshot_locked();
}

std::vector<UrlRecord> Store::frontier_urls(std::size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<UrlRecord> out;
  for (const auto& url : st_.url_order) {
    if (out.size() >= limit) break;
    const auto& r = st_.urls.at(url);
    if (r.status == UrlStatus::Unchecked) out.push_back(r);
  }
  return out;
}

std::vector<TagRecord> Store::frontier_tags(std::size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<TagRecord> out;
  for (const auto& key : st_.tag_order) {
    if (out.size() >= limit) break;
    const auto& r = st_.tags.at(key);
    if (!r.searched) out.push_back(r);
  }
  return out;
}

std::vector<UrlRecord> Store::filtered_urls_needing_tags(
    std::size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<UrlRecord> out;
  for (const auto& url : st_.url_order) {
    if (out.size() >= limit) break;
    const auto& r = st_.urls.at(url);
    if (r.status == UrlStatus::Filtered && !r.tags_extracted) out.push_back(r);
  }
  return out;
}

std::vector<std::string> Store::domains_with_expired_verdict(
    UtcMillis now) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [domain, v] : st_.verdicts)
    if (v.expires_at <= now) out.push_back(domain);
  std::sort(out.begin(), out.end());
  return out;
}

bool Store::contains_url(const std::string& url) const {
  std::lock_guard lock(mu_);
  return st_.urls.count(url) != 0;
}

std::optional<UrlRecord> Store::find_url(const std::string& url) const {
  std::lock_guard lock(mu_);
  auto it = st_.urls.find(url);
  if (it == st_.urls.end()) return std::nullopt;
  return it->second;
}

std::optional<DomainVerdict> Store::find_verdict(
    const std::string& domain) const {
  std::lock_guard lock(mu_);
  auto it = st_.verdicts.find(domain);
  if (it == st_.verdicts.end()) return std::nullopt;
  return it->second;
}

StoreCounts Store::counts() const {
  std::lock_guard lock(mu_);
  StoreCounts c;
  c.urls_crawled = static_cast<std::int64_t>(st_.urls.size());
  c.domains_crawled = static_cast<std::int64_t>(st_.domains_seen.size());
  c.filtered_urls = st_.filtered_count;
  c.poisoned_domains = st_.poisoned_count;
  return c;
}

std::vector<UrlRecord> Store::all_urls() const {
  std::lock_guard lock(mu_);
  std::vector<UrlRecord> out;
  out.reserve(st_.url_order.size());
  for (const auto& url : st_.url_order) out.push_back(st_.urls.at(url));
  return out;
}

std::vector<TagRecord> Store::all_tags() const {
  std::lock_guard lock(mu_);
  std::vector<TagRecord> out;
  out.reserve(st_.tag_order.size());
  for (const auto& key : st_.tag_order) out.push_back(st_.tags.at(key));
  return out;
}

std::vector<DomainVerdict> Store::all_verdicts() const {
  std::lock_guard lock(mu_);
  std::vector<DomainVerdict> out;
  out.reserve(st_.verdicts.size());
  for (const auto& [_, v] : st_.verdicts) out.push_back(v);
  std::sort(out.begin(), out.end(),
            [](const DomainVerdict& a, const DomainVerdict& b) {
              return a.collapsed_domain < b.collapsed_domain;
            });
  return out;
}

std::vector<SearchEvent> Store::all_search_events() const {
  std::lock_guard lock(mu_);
  return st_.searches;
}

std::vector<std::string> Store::url_tokens(const std::string& url) const {
  std::lock_guard lock(mu_);
  auto it = st_.url_tokens.find(url);
  if (it == st_.url_tokens.end()) return {};
  return it->second;
}

std::int64_t Store::journal_lines() const {
  std::lock_guard lock(mu_);
  return lines_;
}

}  // namespace tagseek
