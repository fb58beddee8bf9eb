// SPDX-License-Identifier: Apache-2.0
//
// Tool schemas, search backends, and the HTTP tool service (/search, /visit,
// /python, /healthz) over an immutable index snapshot.
#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchforge/index.hpp"
#include "searchforge/pyexpr.hpp"

namespace httplib {
class Server;
}

namespace sf {

// ---------------------------------------------------------------------------
// Schemas

/// Function declarations offered to agents, in {"type":"function",...} form.
/// Parameter layouts follow the tool prompt the environment mimics.
nlohmann::json search_tool_schema();
nlohmann::json visit_tool_schema();
nlohmann::json python_tool_schema();
nlohmann::json scholar_tool_schema();
nlohmann::json maps_tool_schema();
std::vector<nlohmann::json> all_tool_schemas();

/// JSON Schemas for the service responses.
nlohmann::json search_response_schema();
nlohmann::json visit_response_schema();

/// Minimal JSON Schema checker: type, properties, required, items, minItems,
/// minimum, enum, additionalProperties=false. Returns one message per
/// violation, each prefixed with a JSON-pointer-like path.
std::vector<std::string> schema_violations(const nlohmann::json& schema, const nlohmann::json& value,
                                           const std::string& path = "$");

// ---------------------------------------------------------------------------
// Backends

/// What the verifier and agents need from an environment.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual std::vector<std::vector<SearchResult>> search(const std::vector<std::string>& queries, int top_k) = 0;
  virtual std::vector<VisitResult> visit(const std::vector<std::string>& urls, const std::string& goal) = 0;
};

class LocalSearchBackend : public SearchBackend {
 public:
  explicit LocalSearchBackend(std::shared_ptr<const IndexSnapshot> idx, std::size_t snippet_max = kSnippetMax,
                              std::size_t max_visit_chars = kMaxVisitChars);
  std::vector<std::vector<SearchResult>> search(const std::vector<std::string>& queries, int top_k) override;
  std::vector<VisitResult> visit(const std::vector<std::string>& urls, const std::string& goal) override;

 private:
  std::shared_ptr<const IndexSnapshot> idx_;
  std::size_t snippet_max_;
  std::size_t max_visit_chars_;
};

/// Talks to a running EnvService. Connection failures after `retries`
/// attempts throw EnvironmentUnreachable; non-200 replies throw
/// InvalidArgument with the server message.
class HttpSearchBackend : public SearchBackend {
 public:
  HttpSearchBackend(std::string host, int port, int timeout_sec = 10, int retries = 2);
  ~HttpSearchBackend() override;
  std::vector<std::vector<SearchResult>> search(const std::vector<std::string>& queries, int top_k) override;
  std::vector<VisitResult> visit(const std::vector<std::string>& urls, const std::string& goal) override;

  /// Raw POST; returns (status, body). Throws EnvironmentUnreachable.
  std::pair<int, std::string> post(const std::string& path, const std::string& body);
  std::pair<int, std::string> get(const std::string& path);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int retries_;
};

// ---------------------------------------------------------------------------
// Service

struct EnvConfig {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 = ephemeral
  int top_k = 10;
  int max_top_k = 100;
  std::size_t snippet_max = kSnippetMax;
  std::size_t max_visit_chars = kMaxVisitChars;
  PyLimits python;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

/// Request handlers, usable without a socket.
class EnvHandlers {
 public:
  EnvHandlers(std::shared_ptr<const IndexSnapshot> idx, EnvConfig cfg, Summarizer summarizer = {});

  HttpReply search(const std::string& body) const;
  HttpReply visit(const std::string& body) const;
  HttpReply python(const std::string& body) const;
  HttpReply healthz() const;

  const EnvConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const IndexSnapshot> idx_;
  EnvConfig cfg_;
  Summarizer summarizer_;
};

nlohmann::json search_results_to_json(const std::vector<std::vector<SearchResult>>& results);
nlohmann::json visit_results_to_json(const std::vector<VisitResult>& results);

class EnvService {
 public:
  EnvService(std::shared_ptr<const IndexSnapshot> idx, EnvConfig cfg, Summarizer summarizer = {});
  ~EnvService();
  EnvService(const EnvService&) = delete;
  EnvService& operator=(const EnvService&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  /// Throws PortInUse.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const { return port_; }

 private:
  void bind();

  EnvHandlers handlers_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace sf
