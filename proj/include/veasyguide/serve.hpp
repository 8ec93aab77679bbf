#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <string>

#include <httplib.h>

#include "veasyguide/error.hpp"

namespace veasyguide {

struct ServeConfig {
  std::filesystem::path manifest;
  std::filesystem::path video;
  std::optional<std::filesystem::path> assets;  // player build; a placeholder page otherwise
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string video_content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".mp4" || ext == ".m4v") return "video/mp4";
  if (ext == ".webm") return "video/webm";
  if (ext == ".ogv") return "video/ogg";
  return "application/octet-stream";
}

inline constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>VeasyGuide</title></head><body>"
    "<h1>VeasyGuide</h1><p>No player assets configured. Manifest: <a href=\"/api/manifest\">/api/manifest</a>, "
    "video: <a href=\"/media/video\">/media/video</a>.</p></body></html>";

/// Registers the static routes. Files are read once; the server only hands
/// out immutable bytes. Range requests on `/media/video` are answered with
/// 206 partial content by the HTTP layer.
inline void configure_server(httplib::Server& server, const ServeConfig& cfg) {
  for (const auto& p : {cfg.manifest, cfg.video}) {
    if (!std::filesystem::is_regular_file(p)) throw Error("file missing: " + p.string());
  }
  auto manifest = std::make_shared<const std::string>(read_file(cfg.manifest));
  auto video = std::make_shared<const std::string>(read_file(cfg.video));
  const std::string video_type = video_content_type(cfg.video);

  // Address reuse only; port sharing would let a second server bind a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });

  server.Get("/api/manifest", [manifest](const httplib::Request&, httplib::Response& res) {
    res.set_content(*manifest, "application/json");
  });
  server.Get("/media/video", [video, video_type](const httplib::Request&, httplib::Response& res) {
    res.set_header("Accept-Ranges", "bytes");
    res.set_content(*video, video_type);
  });
  if (cfg.assets) {
    if (!std::filesystem::is_directory(*cfg.assets)) throw Error("assets directory missing: " + cfg.assets->string());
    server.set_mount_point("/", cfg.assets->string());
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

}  // namespace veasyguide
