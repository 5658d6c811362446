#include "factlink/annotation_server.hpp"

#include <chrono>

#include <httplib.h>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

HttpReply json_reply(int status, const Json& j) { return {status, j.dump()}; }
HttpReply error_reply(int status, const std::string& msg) { return json_reply(status, Json{{"error", msg}}); }

Json label_json(const PairLabel& l) { return to_json(l); }

}  // namespace

struct AnnotationServer::Impl {
  httplib::Server http;
};

AnnotationServer::AnnotationServer(AnnotationService& service, Clock clock)
    : service_(service), clock_(std::move(clock)), impl_(std::make_unique<Impl>()) {
  if (!clock_)
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    auto reply = handle(req.method, req.path, query, req.body);
    res.status = reply.status;
    if (!reply.body.empty()) res.set_content(reply.body, "application/json; charset=utf-8");
  };
  impl_->http.Get(".*", route);
  impl_->http.Post(".*", route);
  impl_->http.Put(".*", route);
  impl_->http.Delete(".*", route);
}

AnnotationServer::~AnnotationServer() { stop(); }

HttpReply AnnotationServer::handle(const std::string& method, const std::string& path,
                                   const std::map<std::string, std::string>& query, const std::string& body) {
  static const std::string kPairs = "/api/pairs/";
  try {
    if (path == "/api/pairs/next") {
      if (method != "GET") return error_reply(405, "method not allowed");
      auto it = query.find("annotator");
      if (it == query.end() || it->second.empty()) return error_reply(400, "missing annotator parameter");
      auto assignment = service_.next_pair(it->second, clock_());
      if (!assignment) return {204, ""};
      return json_reply(200, assignment->to_json());
    }
    if (path == "/api/annotations") {
      if (method != "POST") return error_reply(405, "method not allowed");
      Json j;
      try {
        j = Json::parse(body);
      } catch (const Json::parse_error& e) {
        return error_reply(400, std::string("invalid JSON: ") + e.what());
      }
      Annotation a = Annotation::from_json(j);
      a.submitted_at = clock_();
      PairState state = service_.submit(a);
      return json_reply(201, Json{{"pair_status", to_string(state.status)}, {"pair", state.to_json()}});
    }
    if (path == "/api/export/labels") {
      if (method != "GET") return error_reply(405, "method not allowed");
      Json out = Json::array();
      for (const auto& l : service_.export_labels()) out.push_back(label_json(l));
      return json_reply(200, out);
    }
    if (path.starts_with(kPairs) && path.size() > kPairs.size()) {
      if (method != "GET") return error_reply(405, "method not allowed");
      return json_reply(200, service_.pair(path.substr(kPairs.size())).to_json());
    }
    return error_reply(404, "no route for " + path);
  } catch (const ValidationError& e) {
    return error_reply(400, e.what());
  } catch (const NotFoundError& e) {
    return error_reply(404, e.what());
  } catch (const ConflictError& e) {
    return error_reply(409, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0)
    port_ = impl_->http.bind_to_any_port(host);
  else
    port_ = impl_->http.bind_to_port(host, port) ? port : -1;
  return port_;
}

bool AnnotationServer::serve() { return impl_->http.listen_after_bind(); }

bool AnnotationServer::listen(const std::string& host, int port) { return bind(host, port) >= 0 && serve(); }

void AnnotationServer::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace factlink
