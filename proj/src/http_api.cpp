#include "vecsim/http_api.hpp"

#include <httplib.h>
#include <json.hpp>

namespace vecsim {

namespace {

// maps a control payload onto the scripted-event shape; empty on bad input
bool parse_control(const nlohmann::json& j, ScriptedEvent& ev, std::string& err) {
  if (!j.is_object() || !j.contains("command") || !j.at("command").is_string()) {
    err = "body must be an object with a string 'command'";
    return false;
  }
  const auto cmd = j.at("command").get<std::string>();
  if (cmd == "pause") {
    ev.kind = ScriptedEvent::Kind::Pause;
  } else if (cmd == "resume") {
    ev.kind = ScriptedEvent::Kind::Resume;
  } else if (cmd == "inject_services") {
    ev.kind = ScriptedEvent::Kind::InjectServices;
    ev.count = j.value("count", std::int64_t{1});
    ev.cluster = j.value("cluster", -1);
    if (ev.count < 1) {
      err = "count must be >= 1";
      return false;
    }
  } else if (cmd == "trend_burst") {
    ev.kind = ScriptedEvent::Kind::TrendBurst;
    ev.multiplier = j.value("multiplier", 1.0);
    ev.duration_ticks = j.value("duration_ticks", Tick{1});
    if (ev.multiplier < 0.0 || ev.duration_ticks < 1) {
      err = "multiplier must be >= 0 and duration_ticks >= 1";
      return false;
    }
  } else if (cmd == "kill_rsu" || cmd == "revive_rsu") {
    ev.kind = cmd == "kill_rsu" ? ScriptedEvent::Kind::KillRsu : ScriptedEvent::Kind::ReviveRsu;
    ev.rsu = j.value("rsu", -1);
  } else {
    err = "unknown command: " + cmd;
    return false;
  }
  return true;
}

}  // namespace

HttpEndpoint::HttpEndpoint(Engine& eng) : eng_(eng), srv_(std::make_unique<httplib::Server>()) {
  srv_->Get("/status", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(eng_.status_json().dump(), "application/json");
  });
  srv_->Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(eng_.live_frame().to_json().dump(), "application/json");
  });
  srv_->Post("/control", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    ScriptedEvent ev;
    std::string err;
    if (body.is_discarded() || !parse_control(body, ev, err)) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", err.empty() ? "malformed json" : err}}.dump(),
                      "application/json");
      return;
    }
    switch (eng_.enqueue_control(ev)) {
      case Engine::ControlResult::Accepted:
        res.set_content(nlohmann::json{{"status", "queued"}, {"tick", eng_.tick()}}.dump(),
                        "application/json");
        break;
      case Engine::ControlResult::RunFinished:
        res.status = 409;
        res.set_content(nlohmann::json{{"error", "run finished"}}.dump(), "application/json");
        break;
      case Engine::ControlResult::Rejected:
        res.status = 400;
        res.set_content(nlohmann::json{{"error", "invalid command parameters"}}.dump(),
                        "application/json");
        break;
    }
  });
}

HttpEndpoint::~HttpEndpoint() { stop(); }

bool HttpEndpoint::start(const std::string& addr) {
  const auto colon = addr.rfind(':');
  host_ = colon == std::string::npos ? addr : addr.substr(0, colon);
  if (host_.empty()) host_ = "127.0.0.1";
  int want = 0;
  if (colon != std::string::npos) {
    try {
      want = std::stoi(addr.substr(colon + 1));
    } catch (...) {
      return false;
    }
  }
  if (want == 0) {
    port_ = srv_->bind_to_any_port(host_);
    if (port_ < 0) return false;
  } else {
    if (!srv_->bind_to_port(host_, want)) return false;
    port_ = want;
  }
  eng_.set_interactive(true);
  thread_ = std::thread([this] { srv_->listen_after_bind(); });
  srv_->wait_until_ready();
  return true;
}

void HttpEndpoint::stop() {
  if (thread_.joinable()) {
    srv_->stop();
    thread_.join();
  }
}

}  // namespace vecsim
