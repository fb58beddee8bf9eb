// SPDX-License-Identifier: Apache-2.0
#include "searchforge/env_service.hpp"

#include <chrono>
#include <mutex>

#include <httplib.h>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Schemas

namespace {

json function_decl(const std::string& name, const std::string& description, json parameters) {
  return json{{"type", "function"},
              {"function", {{"name", name}, {"description", description}, {"parameters", std::move(parameters)}}}};
}

json query_array(const std::string& description) {
  return json{{"type", "array"},
              {"items", {{"type", "string"}, {"description", "The search query."}}},
              {"minItems", 1},
              {"description", description}};
}

}  // namespace

json search_tool_schema() {
  return function_decl("search", "Run web searches and return the top results for each query. Accepts multiple queries.",
                       {{"type", "object"},
                        {"properties", {{"query", query_array("The list of search queries.")}}},
                        {"required", {"query"}}});
}

json visit_tool_schema() {
  return function_decl(
      "visit", "Open one or more pages and return the content relevant to the goal.",
      {{"type", "object"},
       {"properties",
        {{"url", {{"type", "array"}, {"items", {{"type", "string"}}}, {"description", "One URL or a list of URLs to open."}}},
         {"goal", {{"type", "string"}, {"description", "What information to extract from the page(s)."}}}}},
       {"required", {"url", "goal"}}});
}

json python_tool_schema() {
  return function_decl("PythonInterpreter",
                       "Evaluate Python code. Arguments must be the empty object {}; the code follows the JSON "
                       "block inside <code></code> tags. Only printed output is returned.",
                       {{"type", "object"}, {"properties", json::object()}, {"required", json::array()}});
}

json scholar_tool_schema() {
  return function_decl("google_scholar", "Search academic publications. Accepts multiple queries.",
                       {{"type", "object"},
                        {"properties", {{"query", query_array("The list of search queries for the scholar index.")}}},
                        {"required", {"query"}}});
}

json maps_tool_schema() {
  return function_decl(
      "google_maps", "Search places. Returns names, addresses, coordinates and identifiers.",
      {{"type", "object"},
       {"properties",
        {{"q", {{"type", "string"}, {"description", "Place search query."}}},
         {"page", {{"type", "integer"}, {"description", "Page number of results."}, {"default", 1}, {"minimum", 1}}}}},
       {"required", {"q"}}});
}

std::vector<json> all_tool_schemas() {
  return {search_tool_schema(), visit_tool_schema(), python_tool_schema(), scholar_tool_schema(), maps_tool_schema()};
}

json search_response_schema() {
  json result = {{"type", "object"},
                 {"properties", {{"title", {{"type", "string"}}}, {"snippet", {{"type", "string"}}}, {"url", {{"type", "string"}}}}},
                 {"required", {"title", "snippet", "url"}},
                 {"additionalProperties", false}};
  return {{"type", "array"}, {"items", {{"type", "array"}, {"items", result}}}};
}

json visit_response_schema() {
  json entry = {{"type", "object"},
                {"properties",
                 {{"url", {{"type", "string"}}},
                  {"status", {{"type", "string"}, {"enum", {"ok", "not_found"}}}},
                  {"content", {{"type", "string"}}}}},
                {"required", {"url", "status", "content"}},
                {"additionalProperties", false}};
  return {{"type", "array"}, {"items", entry}};
}

namespace {

bool type_matches(const std::string& type, const json& v) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

}  // namespace

std::vector<std::string> schema_violations(const json& schema, const json& value, const std::string& path) {
  std::vector<std::string> out;
  if (auto t = schema.find("type"); t != schema.end()) {
    if (!type_matches(t->get<std::string>(), value)) {
      out.push_back(path + ": expected " + t->get<std::string>());
      return out;
    }
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    bool found = false;
    for (const auto& option : *e) found = found || option == value;
    if (!found) out.push_back(path + ": value not in enum");
  }
  if (auto m = schema.find("minimum"); m != schema.end() && value.is_number()) {
    if (value.get<double>() < m->get<double>()) out.push_back(path + ": below minimum");
  }
  if (value.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && value.size() < m->get<std::size_t>())
      out.push_back(path + ": fewer than " + std::to_string(m->get<std::size_t>()) + " items");
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        auto sub = schema_violations(*items, value[i], path + "[" + std::to_string(i) + "]");
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
  }
  if (value.is_object()) {
    const json props = schema.value("properties", json::object());
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& r : *req)
        if (!value.contains(r.get<std::string>())) out.push_back(path + ": missing required \"" + r.get<std::string>() + "\"");
    }
    for (const auto& [key, sub_schema] : props.items()) {
      if (value.contains(key)) {
        auto sub = schema_violations(sub_schema, value.at(key), path + "." + key);
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
    if (schema.value("additionalProperties", true) == false) {
      for (const auto& [key, _] : value.items())
        if (!props.contains(key)) out.push_back(path + ": unexpected property \"" + key + "\"");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON shapes

json search_results_to_json(const std::vector<std::vector<SearchResult>>& results) {
  json out = json::array();
  for (const auto& list : results) {
    json arr = json::array();
    for (const auto& r : list) arr.push_back({{"title", r.title}, {"snippet", r.snippet}, {"url", r.url}});
    out.push_back(std::move(arr));
  }
  return out;
}

json visit_results_to_json(const std::vector<VisitResult>& results) {
  json out = json::array();
  for (const auto& r : results)
    out.push_back({{"url", r.url}, {"status", std::string(to_string(r.status))}, {"content", r.content}});
  return out;
}

// ---------------------------------------------------------------------------
// Backends

LocalSearchBackend::LocalSearchBackend(std::shared_ptr<const IndexSnapshot> idx, std::size_t snippet_max,
                                       std::size_t max_visit_chars)
    : idx_(std::move(idx)), snippet_max_(snippet_max), max_visit_chars_(max_visit_chars) {}

std::vector<std::vector<SearchResult>> LocalSearchBackend::search(const std::vector<std::string>& queries, int top_k) {
  return idx_->search(queries, top_k, snippet_max_);
}

std::vector<VisitResult> LocalSearchBackend::visit(const std::vector<std::string>& urls, const std::string& goal) {
  return sf::visit(idx_->corpus(), urls, goal, max_visit_chars_);
}

struct HttpSearchBackend::Impl {
  httplib::Client client;
  std::mutex mu;
  Impl(const std::string& host, int port) : client(host, port) {}
};

HttpSearchBackend::HttpSearchBackend(std::string host, int port, int timeout_sec, int retries)
    : impl_(std::make_unique<Impl>(host, port)), retries_(std::max(0, retries)) {
  impl_->client.set_connection_timeout(timeout_sec, 0);
  impl_->client.set_read_timeout(timeout_sec, 0);
  impl_->client.set_write_timeout(timeout_sec, 0);
  impl_->client.set_keep_alive(true);
  impl_->client.set_tcp_nodelay(true);
}

HttpSearchBackend::~HttpSearchBackend() = default;

std::pair<int, std::string> HttpSearchBackend::post(const std::string& path, const std::string& body) {
  std::lock_guard lock(impl_->mu);
  std::string last_error;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    auto res = impl_->client.Post(path, body, "application/json");
    if (res) return {res->status, res->body};
    last_error = httplib::to_string(res.error());
    if (attempt < retries_) std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
  }
  throw Error(ErrorCode::EnvironmentUnreachable, "POST " + path + ": " + last_error);
}

std::pair<int, std::string> HttpSearchBackend::get(const std::string& path) {
  std::lock_guard lock(impl_->mu);
  std::string last_error;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    auto res = impl_->client.Get(path);
    if (res) return {res->status, res->body};
    last_error = httplib::to_string(res.error());
    if (attempt < retries_) std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
  }
  throw Error(ErrorCode::EnvironmentUnreachable, "GET " + path + ": " + last_error);
}

namespace {

json parse_reply(const std::pair<int, std::string>& reply, const json& schema) {
  json body = json::parse(reply.second, nullptr, false);
  if (reply.first != 200) {
    std::string msg = body.is_object() && body.contains("error") ? body["error"].dump() : reply.second;
    throw Error(ErrorCode::InvalidArgument, "server replied " + std::to_string(reply.first) + ": " + msg);
  }
  if (body.is_discarded()) throw Error(ErrorCode::MalformedRecord, "server reply is not JSON");
  auto problems = schema_violations(schema, body);
  if (!problems.empty()) throw Error(ErrorCode::MalformedRecord, "server reply violates schema: " + problems.front());
  return body;
}

}  // namespace

std::vector<std::vector<SearchResult>> HttpSearchBackend::search(const std::vector<std::string>& queries, int top_k) {
  json req = {{"query", queries}, {"top_k", top_k}};
  json body = parse_reply(post("/search", req.dump()), search_response_schema());
  std::vector<std::vector<SearchResult>> out;
  for (const auto& list : body) {
    auto& dst = out.emplace_back();
    for (const auto& r : list) {
      SearchResult sr;
      sr.title = r["title"];
      sr.snippet = r["snippet"];
      sr.url = r["url"];
      dst.push_back(std::move(sr));
    }
  }
  return out;
}

std::vector<VisitResult> HttpSearchBackend::visit(const std::vector<std::string>& urls, const std::string& goal) {
  json req = {{"url", urls}, {"goal", goal}};
  json body = parse_reply(post("/visit", req.dump()), visit_response_schema());
  std::vector<VisitResult> out;
  for (const auto& e : body) {
    VisitResult vr;
    vr.url = e["url"];
    vr.status = e["status"] == "ok" ? VisitStatus::Ok : VisitStatus::NotFound;
    vr.content = e["content"];
    out.push_back(std::move(vr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Handlers

namespace {

HttpReply error_reply(int status, const std::string& code, const std::string& message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

HttpReply schema_error(const std::vector<std::string>& problems) {
  std::string msg;
  for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
  return error_reply(400, "SchemaViolation", msg);
}

std::optional<json> parse_object(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

}  // namespace

EnvHandlers::EnvHandlers(std::shared_ptr<const IndexSnapshot> idx, EnvConfig cfg, Summarizer summarizer)
    : idx_(std::move(idx)), cfg_(std::move(cfg)), summarizer_(std::move(summarizer)) {
  if (!idx_) throw Error(ErrorCode::InvalidArgument, "service needs an index");
}

HttpReply EnvHandlers::search(const std::string& body) const {
  auto req = parse_object(body);
  if (!req) return error_reply(400, "SchemaViolation", "body must be a JSON object");
  static const json params = search_tool_schema()["function"]["parameters"];
  auto problems = schema_violations(params, *req);
  int top_k = cfg_.top_k;
  if (req->contains("top_k")) {
    const json& k = (*req)["top_k"];
    if (!k.is_number_integer() || k.get<long long>() < 1 || k.get<long long>() > cfg_.max_top_k)
      problems.push_back("$.top_k: expected integer in [1, " + std::to_string(cfg_.max_top_k) + "]");
    else
      top_k = k.get<int>();
  }
  if (!problems.empty()) return schema_error(problems);
  try {
    auto results = idx_->search((*req)["query"].get<std::vector<std::string>>(), top_k, cfg_.snippet_max);
    return {200, search_results_to_json(results).dump()};
  } catch (const Error& e) {
    return error_reply(400, std::string(to_string(e.code())), e.what());
  }
}

HttpReply EnvHandlers::visit(const std::string& body) const {
  auto req = parse_object(body);
  if (!req) return error_reply(400, "SchemaViolation", "body must be a JSON object");
  // A bare string url is accepted as a one-element list.
  if (req->contains("url") && (*req)["url"].is_string()) (*req)["url"] = json::array({(*req)["url"]});
  static const json params = visit_tool_schema()["function"]["parameters"];
  auto problems = schema_violations(params, *req);
  if (problems.empty()) {
    if ((*req)["url"].empty()) problems.push_back("$.url: at least one url required");
    if (trim((*req)["goal"].get<std::string>()).empty()) problems.push_back("$.goal: must be non-empty");
  }
  if (!problems.empty()) return schema_error(problems);
  auto results = sf::visit(idx_->corpus(), (*req)["url"].get<std::vector<std::string>>(),
                           (*req)["goal"].get<std::string>(), cfg_.max_visit_chars, summarizer_);
  return {200, visit_results_to_json(results).dump()};
}

HttpReply EnvHandlers::python(const std::string& body) const {
  auto req = parse_object(body);
  if (!req) return error_reply(400, "SchemaViolation", "body must be a JSON object");
  static const json schema = {{"type", "object"}, {"properties", {{"code", {{"type", "string"}}}}}, {"required", {"code"}}};
  auto problems = schema_violations(schema, *req);
  if (!problems.empty()) return schema_error(problems);
  PyResult r = run_restricted_python((*req)["code"].get<std::string>(), cfg_.python);
  json out = {{"output", r.output}, {"error", r.error ? json(*r.error) : json(nullptr)}};
  return {200, out.dump()};
}

HttpReply EnvHandlers::healthz() const {
  json out = {{"status", "ok"},
              {"build_hash", idx_->build_hash()},
              {"documents", idx_->doc_count()},
              {"vocabulary", idx_->vocabulary_size()}};
  return {200, out.dump()};
}

// ---------------------------------------------------------------------------
// Service

EnvService::EnvService(std::shared_ptr<const IndexSnapshot> idx, EnvConfig cfg, Summarizer summarizer)
    : handlers_(std::move(idx), std::move(cfg), std::move(summarizer)), server_(std::make_unique<httplib::Server>()) {
  auto wrap = [](HttpReply r, httplib::Response& res) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Post("/search", [this, wrap](const httplib::Request& req, httplib::Response& res) {
    wrap(handlers_.search(req.body), res);
  });
  server_->Post("/visit", [this, wrap](const httplib::Request& req, httplib::Response& res) {
    wrap(handlers_.visit(req.body), res);
  });
  server_->Post("/python", [this, wrap](const httplib::Request& req, httplib::Response& res) {
    wrap(handlers_.python(req.body), res);
  });
  server_->Get("/healthz", [this, wrap](const httplib::Request&, httplib::Response& res) { wrap(handlers_.healthz(), res); });
  server_->set_keep_alive_max_count(100000);
  server_->set_tcp_nodelay(true);
  // SO_REUSEADDR only: a second service on a taken port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
}

EnvService::~EnvService() { stop(); }

void EnvService::bind() {
  const auto& cfg = handlers_.config();
  if (cfg.port == 0) {
    port_ = server_->bind_to_any_port(cfg.host);
    if (port_ < 0) throw Error(ErrorCode::PortInUse, "could not bind an ephemeral port on " + cfg.host);
  } else {
    if (!server_->bind_to_port(cfg.host, cfg.port))
      throw Error(ErrorCode::PortInUse, cfg.host + ":" + std::to_string(cfg.port));
    port_ = cfg.port;
  }
}

int EnvService::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void EnvService::run() {
  bind();
  server_->listen_after_bind();
}

void EnvService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace sf
