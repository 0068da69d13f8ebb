#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tagseek/time_util.hpp"

namespace tagseek {

enum class UrlStatus { Unchecked, Filtered, Unfiltered, FetchFailed };

const char* to_string(UrlStatus s);
std::optional<UrlStatus> url_status_from_string(const std::string& s);

// How a URL entered the store. Absent exactly for seed URLs.
struct Provenance {
  std::string tag;
  std::string base_domain;  // collapsed domain the tag was extracted from
  int rank = 0;             // position in the search results, 1-based
};

struct UrlRecord {
  std::string url;               // normalized, primary key
  std::string domain;            // full hostname
  std::string collapsed_domain;  // after collapse rules
  UrlStatus status = UrlStatus::Unchecked;
  std::optional<Provenance> discovered_via;
  UtcMillis first_seen = 0;
  std::optional<UtcMillis> last_checked;
  bool tags_extracted = false;
};

struct TagRecord {
  std::string tag;         // lowercase [a-z]{2,}
  std::string source_url;
  std::string source_domain;  // collapsed
  double weight = 0.0;        // TF-IDF score
  bool searched = false;
  UtcMillis created = 0;
};

enum class Verdict { Poisoned, Clean };

struct DnsAnswer {
  std::string name;
  std::uint32_t ttl = 0;
  std::string rdata_ip;  // dotted quad
};

struct ProbeResult {
  enum class Outcome { Response, Timeout };
  std::string sink_ip;
  Outcome outcome = Outcome::Timeout;
  std::optional<double> latency_ms;
  std::vector<DnsAnswer> answers;
  std::optional<int> rcode;
  bool id_matched = false;  // true for every recorded response
};

struct DomainVerdict {
  std::string collapsed_domain;
  Verdict verdict = Verdict::Clean;
  std::vector<ProbeResult> evidence;
  UtcMillis decided_at = 0;
  UtcMillis expires_at = 0;
};

struct SearchEvent {
  std::string tag;
  std::string backend;
  UtcMillis queried_at = 0;
  std::vector<std::pair<int, std::string>> results;  // (rank, url), ranks 1..n
  std::string error;  // empty when the query succeeded

  int result_count() const { return static_cast<int>(results.size()); }
};

nlohmann::json to_json(const UrlRecord& r);
nlohmann::json to_json(const TagRecord& r);
nlohmann::json to_json(const DomainVerdict& v);
nlohmann::json to_json(const SearchEvent& e);
nlohmann::json to_json(const ProbeResult& p);

UrlRecord url_record_from_json(const nlohmann::json& j);
TagRecord tag_record_from_json(const nlohmann::json& j);
DomainVerdict domain_verdict_from_json(const nlohmann::json& j);
SearchEvent search_event_from_json(const nlohmann::json& j);
ProbeResult probe_result_from_json(const nlohmann::json& j);

}  // namespace tagseek
