#ifndef HCTONE_SERVICE_H_
#define HCTONE_SERVICE_H_

#include <memory>
#include <string>
#include <string_view>

namespace hctone {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;         // 0 picks a free port
  unsigned workers = 0;    // 0 means one per hardware thread
  double max_duration_s = 30.0;
  std::string cors_origin = "*";
};

struct HttpReply {
  int status = 200;
  std::string content_type;
  std::string body;
};

// Endpoint logic, independent of the transport.
//
// POST /v1/render takes {"preset": name | {...}} or {"scene": {...}}, optional
// "params" overrides and "analysis": {"phon", "overlay", "window", "hop"}. A
// success is multipart/mixed with an application/json part (manifest and
// analysis) followed by an audio/wav part. Errors are JSON
// {"error": {"code", "message", "field"}} with 400 for schema violations,
// 413 above the duration cap and 422 for out-of-range values.
HttpReply handle_render(std::string_view body, const ServiceConfig& config);
HttpReply handle_presets();
HttpReply handle_healthz();

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // False when the address cannot be bound.
  bool bind();
  int port() const;
  // Serves until stop(); in-flight requests finish before it returns.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hctone

#endif  // HCTONE_SERVICE_H_
