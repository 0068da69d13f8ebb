#include "tagseek/records.hpp"

#include <stdexcept>

namespace tagseek {

using nlohmann::json;

const char* to_string(UrlStatus s) {
  switch (s) {
    case UrlStatus::Unchecked: return "unchecked";
    case UrlStatus::Filtered: return "filtered";
    case UrlStatus::Unfiltered: return "unfiltered";
    case UrlStatus::FetchFailed: return "fetch_failed";
  }
  return "unchecked";
}

std::optional<UrlStatus> url_status_from_string(const std::string& s) {
  if (s == "unchecked") return UrlStatus::Unchecked;
  if (s == "filtered") return UrlStatus::Filtered;
  if (s == "unfiltered") return UrlStatus::Unfiltered;
  if (s == "fetch_failed") return UrlStatus::FetchFailed;
  return std::nullopt;
}

json to_json(const UrlRecord& r) {
  json j{{"url", r.url},
         {"domain", r.domain},
         {"collapsed_domain", r.collapsed_domain},
         {"status", to_string(r.status)},
         {"first_seen", format_utc(r.first_seen)},
         {"tags_extracted", r.tags_extracted}};
  if (r.discovered_via) {
    j["discovered_via"] = {{"tag", r.discovered_via->tag},
                           {"base_domain", r.discovered_via->base_domain},
                           {"rank", r.discovered_via->rank}};
  }
  if (r.last_checked) j["last_checked"] = format_utc(*r.last_checked);
  return j;
}

UrlRecord url_record_from_json(const json& j) {
  UrlRecord r;
  r.url = j.at("url").get<std::string>();
  r.domain = j.at("domain").get<std::string>();
  r.collapsed_domain = j.at("collapsed_domain").get<std::string>();
  auto st = url_status_from_string(j.at("status").get<std::string>());
  if (!st) throw std::runtime_error("bad url status");
  r.status = *st;
  if (j.contains("discovered_via")) {
    const auto& d = j.at("discovered_via");
    r.discovered_via = Provenance{d.at("tag").get<std::string>(),
                                  d.at("base_domain").get<std::string>(),
                                  d.at("rank").get<int>()};
  }
  auto fs = parse_utc(j.at("first_seen").get<std::string>());
  if (!fs) throw std::runtime_error("bad first_seen");
  r.first_seen = *fs;
  if (j.contains("last_checked")) {
    auto lc = parse_utc(j.at("last_checked").get<std::string>());
    if (!lc) throw std::runtime_error("bad last_checked");
    r.last_checked = *lc;
  }
  r.tags_extracted = j.at("tags_extracted").get<bool>();
  return r;
}

json to_json(const TagRecord& r) {
  return json{{"tag", r.tag},
              {"source_url", r.source_url},
              {"source_domain", r.source_domain},
              {"weight", r.weight},
              {"searched", r.searched},
              {"created", format_utc(r.created)}};
}

TagRecord tag_record_from_json(const json& j) {
  TagRecord r;
  r.tag = j.at("tag").get<std::string>();
  r.source_url = j.at("source_url").get<std::string>();
  r.source_domain = j.at("source_domain").get<std::string>();
  r.weight = j.at("weight").get<double>();
  r.searched = j.at("searched").get<bool>();
  auto c = parse_utc(j.at("created").get<std::string>());
  if (!c) throw std::runtime_error("bad created");
  r.created = *c;
  return r;
}

json to_json(const ProbeResult& p) {
  json j{{"sink_ip", p.sink_ip},
         {"outcome", p.outcome == ProbeResult::Outcome::Response ? "response"
                                                                 : "timeout"},
         {"id_matched", p.id_matched}};
  if (p.latency_ms) j["latency_ms"] = *p.latency_ms;
  if (p.rcode) j["rcode"] = *p.rcode;
  if (!p.answers.empty()) {
    json arr = json::array();
    for (const auto& a : p.answers)
      arr.push_back({{"name", a.name}, {"ttl", a.ttl}, {"rdata", a.rdata_ip}});
    j["answers"] = arr;
  }
  return j;
}

ProbeResult probe_result_from_json(const json& j) {
  ProbeResult p;
  p.sink_ip = j.at("sink_ip").get<std::string>();
  p.outcome = j.at("outcome").get<std::string>() == "response"
                  ? ProbeResult::Outcome::Response
                  : ProbeResult::Outcome::Timeout;
  p.id_matched = j.at("id_matched").get<bool>();
  if (j.contains("latency_ms")) p.latency_ms = j.at("latency_ms").get<double>();
  if (j.contains("rcode")) p.rcode = j.at("rcode").get<int>();
  if (j.contains("answers")) {
    for (const auto& a : j.at("answers")) {
      p.answers.push_back(DnsAnswer{a.at("name").get<std::string>(),
                                    a.at("ttl").get<std::uint32_t>(),
                                    a.at("rdata").get<std::string>()});
    }
  }
  return p;
}

json to_json(const DomainVerdict& v) {
  json ev = json::array();
  for (const auto& p : v.evidence) ev.push_back(to_json(p));
  return json{{"collapsed_domain", v.collapsed_domain},
              {"verdict", v.verdict == Verdict::Poisoned ? "poisoned" : "clean"},
              {"evidence", ev},
              {"decided_at", format_utc(v.decided_at)},
              {"expires_at", format_utc(v.expires_at)}};
}

DomainVerdict domain_verdict_from_json(const json& j) {
  DomainVerdict v;
  v.collapsed_domain = j.at("collapsed_domain").get<std::string>();
  v.verdict = j.at("verdict").get<std::string>() == "poisoned"
                  ? Verdict::Poisoned
                  : Verdict::Clean;
  for (const auto& p : j.at("evidence")) v.evidence.push_back(probe_result_from_json(p));
  auto d = parse_utc(j.at("decided_at").get<std::string>());
  auto e = parse_utc(j.at("expires_at").get<std::string>());
  if (!d || !e) throw std::runtime_error("bad verdict timestamps");
  v.decided_at = *d;
  v.expires_at = *e;
  return v;
}

json to_json(const SearchEvent& e) {
  json results = json::array();
  for (const auto& [rank, url] : e.results)
    results.push_back({{"rank", rank}, {"url", url}});
  json j{{"tag", e.tag},
         {"backend", e.backend},
         {"queried_at", format_utc(e.queried_at)},
         {"results", results},
         {"result_count", e.result_count()}};
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

SearchEvent search_event_from_json(const json& j) {
  SearchEvent e;
  e.tag = j.at("tag").get<std::string>();
  e.backend = j.at("backend").get<std::string>();
  auto q = parse_utc(j.at("queried_at").get<std::string>());
  if (!q) throw std::runtime_error("bad queried_at");
  e.queried_at = *q;
  for (const auto& r : j.at("results"))
    e.results.emplace_back(r.at("rank").get<int>(), r.at("url").get<std::string>());
  if (j.contains("error")) e.error = j.at("error").get<std::string>();
  return e;
}

}  // namespace tagseek
