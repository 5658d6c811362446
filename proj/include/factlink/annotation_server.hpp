#pragma once

// JSON-over-HTTP front end of the annotation service.

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "factlink/annotation.hpp"

namespace factlink {

struct HttpReply {
  int status = 200;
  std::string body;  ///< JSON, empty for 204
};

/// Routes requests to an AnnotationService. `handle` is usable without a
/// socket; `listen` serves it over HTTP until `stop`.
///
///   GET  /api/pairs/next?annotator=<id>   200 assignment | 204
///   POST /api/annotations                 201 {pair_status, pair} | 400 | 404 | 409
///   GET  /api/pairs/<id>                  200 pair state | 404
///   GET  /api/export/labels               200 [pair label]
class AnnotationServer {
 public:
  using Clock = std::function<Timestamp()>;

  /// `clock` defaults to wall-clock seconds.
  explicit AnnotationServer(AnnotationService& service, Clock clock = {});
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  HttpReply handle(const std::string& method, const std::string& path,
                   const std::map<std::string, std::string>& query, const std::string& body);

  /// Binds and blocks. Port 0 picks a free port, reported by `port()` once bound.
  bool listen(const std::string& host, int port);
  /// Binds without serving yet; returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves on a socket from `bind`; blocks.
  bool serve();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  AnnotationService& service_;
  Clock clock_;
  std::unique_ptr<Impl> impl_;
  int port_ = -1;
};

}  // namespace factlink
