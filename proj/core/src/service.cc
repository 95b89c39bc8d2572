#include "hctone/service.h"

#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "hctone/analysis_report.h"
#include "hctone/iso226.h"
#include "hctone/scene.h"
#include "httplib.h"
#include "json_fields.h"

namespace hctone {

using detail::json;

namespace {

HttpReply json_reply(int status, const json& doc) {
  return {status, "application/json", doc.dump()};
}

HttpReply error_reply(int status, const std::string& code, const std::string& message,
                      const std::string& field) {
  json err{{"code", code}, {"message", message}};
  err["field"] = field.empty() ? json(nullptr) : json(field);
  return json_reply(status, {{"error", std::move(err)}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter:
    case ErrorCode::kOutOfDomain:
    case ErrorCode::kInvalidFrame:
      return 422;
    default:
      return 400;
  }
}

double scene_duration(const Scene& scene) {
  if (scene.preset) return scene.preset->duration_s;
  return scene.controls->f0.duration();
}

AnalysisConfig analysis_config(const json& request) {
  using namespace detail;
  AnalysisConfig cfg;
  cfg.include_spectrogram = true;
  auto it = request.find("analysis");
  if (it == request.end()) return cfg;
  const json& a = *it;
  if (!a.is_object()) throw Error(ErrorCode::kInvalidInput, "expected an object", "analysis");
  for (const auto& [key, value] : a.items()) {
    const std::string fp = "analysis." + key;
    if (key == "phon") {
      cfg.phon_level = as_number(value, fp);
      if (!(cfg.phon_level >= 20.0 && cfg.phon_level <= 80.0))
        throw Error(ErrorCode::kOutOfDomain, "must be in [20, 80] phon", fp);
    } else if (key == "overlay") {
      cfg.include_spectrogram = as_bool(value, fp);
    } else if (key == "window") {
      const long long w = as_integer(value, fp);
      if (w < 64 || w > 65536 || (w & (w - 1)) != 0)
        throw Error(ErrorCode::kInvalidParameter, "must be a power of two in [64, 65536]", fp);
      cfg.stft.window_size = static_cast<std::size_t>(w);
    } else if (key == "hop") {
      const long long h = as_integer(value, fp);
      if (h < 1) throw Error(ErrorCode::kInvalidParameter, "must be >= 1", fp);
      cfg.stft.hop = static_cast<std::size_t>(h);
    } else {
      throw Error(ErrorCode::kInvalidInput, "unknown field", fp);
    }
  }
  if (cfg.stft.hop > cfg.stft.window_size)
    throw Error(ErrorCode::kInvalidParameter, "hop must not exceed window", "analysis.hop");
  return cfg;
}

Scene request_scene(const json& request) {
  using namespace detail;
  if (!request.is_object())
    throw Error(ErrorCode::kInvalidInput, "request must be an object", "");
  for (const auto& [key, value] : request.items())
    if (key != "schema_version" && key != "preset" && key != "scene" && key != "params" &&
        key != "analysis")
      throw Error(ErrorCode::kInvalidInput, "unknown field", key);
  check_schema_version(request, "");
  const bool has_preset = request.contains("preset");
  const bool has_scene = request.contains("scene");
  if (has_preset == has_scene)
    throw Error(ErrorCode::kInvalidInput, "request needs exactly one of preset or scene",
                has_preset ? "scene" : "preset");
  json scene_doc;
  if (has_preset) {
    scene_doc["preset"] = request.at("preset");
  } else {
    scene_doc = request.at("scene");
    if (!scene_doc.is_object())
      throw Error(ErrorCode::kInvalidInput, "expected an object", "scene");
    scene_doc.erase("output");
  }
  Scene scene;
  try {
    scene = parse_scene(scene_doc.dump());
  } catch (const Error& e) {
    if (!has_scene || e.field().empty()) throw;
    throw Error(e.code(), e.what(), "scene." + e.field());
  }
  if (auto it = request.find("params"); it != request.end())
    apply_params(*it, "params", scene.params);
  return scene;
}

}  // namespace

HttpReply handle_render(std::string_view body, const ServiceConfig& config) {
  try {
    const json request = detail::parse_document(body);
    Scene scene = request_scene(request);
    const AnalysisConfig acfg = analysis_config(request);
    const double duration = scene_duration(scene);
    if (duration > config.max_duration_s)
      return error_reply(413, "duration_cap",
                         "scene lasts " + json(duration).dump() + " s; the cap is " +
                             json(config.max_duration_s).dump() + " s",
                         scene.preset ? "preset.duration_s" : "scene.controls.f0");
    const SceneRender render = render_scene(scene);
    const AnalysisReport report = analyze_audio(render.result.audio, acfg, &render.controls.f0);

    json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["manifest"] = json::parse(render.manifest);
    meta["analysis"] = json::parse(analysis_to_json(report));
    const std::string boundary = "hctone-" + render.wav_sha256.substr(0, 32);
    std::string out;
    out += "--" + boundary + "\r\nContent-Type: application/json\r\n";
    out += "Content-Disposition: inline; name=\"analysis\"\r\n\r\n";
    out += meta.dump();
    out += "\r\n--" + boundary + "\r\nContent-Type: audio/wav\r\n";
    out += "Content-Disposition: attachment; name=\"audio\"; filename=\"render.wav\"\r\n\r\n";
    out.append(render.wav.begin(), render.wav.end());
    out += "\r\n--" + boundary + "--\r\n";
    return {200, "multipart/mixed; boundary=" + boundary, std::move(out)};
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), std::string(error_code_name(e.code())), e.what(),
                       std::string(e.field()));
  }
}

HttpReply handle_presets() {
  return {200, "application/json", preset_catalog_json()};
}

HttpReply handle_healthz() {
  const auto& tables = active_iso_tables();
  return json_reply(200, {{"status", "ok"},
                          {"name", "hctone"},
                          {"version", HCTONE_VERSION},
                          {"schema_version", kSchemaVersion},
                          {"iso_tables", {{"version", tables.version}, {"sha256", tables.checksum()}}}});
}

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  int port = -1;
  std::atomic<bool> stop_requested{false};
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  auto& svr = impl_->server;
  const ServiceConfig& cfg = impl_->config;
  const unsigned workers =
      cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  svr.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  // Exclusive bind: a second instance on the same port must fail.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  svr.set_default_headers({{"Access-Control-Allow-Origin", cfg.cors_origin},
                           {"Vary", "Origin"}});
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  svr.Get("/healthz", [send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_healthz());
  });
  svr.Get("/v1/presets", [send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_presets());
  });
  svr.Post("/v1/render", [send, &cfg](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_render(req.body, cfg));
  });
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  svr.set_exception_handler([send](const httplib::Request&, httplib::Response& res,
                                   std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_reply(500, "internal", what, ""));
  });
}

Service::~Service() { stop(); }

bool Service::bind() {
  auto& i = *impl_;
  if (i.config.port == 0) {
    i.port = i.server.bind_to_any_port(i.config.host);
    return i.port > 0;
  }
  if (!i.server.bind_to_port(i.config.host, i.config.port)) return false;
  i.port = i.config.port;
  return true;
}

int Service::port() const { return impl_->port; }

void Service::run() {
  if (!impl_->stop_requested) impl_->server.listen_after_bind();
}

void Service::stop() {
  impl_->stop_requested = true;
  impl_->server.stop();
}

}  // namespace hctone
