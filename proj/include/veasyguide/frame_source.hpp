#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "veasyguide/error.hpp"
#include "veasyguide/image_io.hpp"
#include "veasyguide/ingest.hpp"

namespace veasyguide {

/// Sequential, single-consumer frame iterator. `meta()` is valid right after
/// construction; `rewind()` restarts iteration at frame 0.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const VideoMeta& meta() const = 0;
  virtual std::optional<Frame> next() = 0;
  virtual void rewind() = 0;
};

enum class FormatHint { kAuto, kY4m, kImageDir };

/// Frames held in memory; used by tests and small synthetic inputs.
class MemoryFrameSource final : public FrameSource {
 public:
  MemoryFrameSource(std::vector<Frame> frames, Rational fps) : frames_(std::move(frames)) {
    const int w = frames_.empty() ? 0 : frames_.front().width;
    const int h = frames_.empty() ? 0 : frames_.front().height;
    meta_ = VideoMeta::make(fps, w, h, static_cast<std::int64_t>(frames_.size()));
  }

  /// Builds frames from luma planes, assigning indices and timestamps.
  static MemoryFrameSource from_planes(const std::vector<LumaPlane>& planes, Rational fps) {
    std::vector<Frame> frames;
    frames.reserve(planes.size());
    for (std::size_t i = 0; i < planes.size(); ++i) {
      frames.push_back(frame_from_luma(planes[i], static_cast<std::int64_t>(i), fps));
    }
    return MemoryFrameSource(std::move(frames), fps);
  }

  const VideoMeta& meta() const override { return meta_; }
  std::optional<Frame> next() override {
    if (pos_ >= frames_.size()) return std::nullopt;
    const Frame& f = frames_[pos_++];
    if (f.width != meta_.width || f.height != meta_.height) {
      throw DimensionMismatch("frame " + std::to_string(f.index) + " has a different size");
    }
    return f;
  }
  void rewind() override { pos_ = 0; }

 private:
  std::vector<Frame> frames_;
  VideoMeta meta_;
  std::size_t pos_ = 0;
};

/// YUV4MPEG2 reader. Only 4:2:0 and mono streams are accepted; frames are
/// exposed as the Y plane and chroma is skipped.
class Y4mFrameSource final : public FrameSource {
 public:
  explicit Y4mFrameSource(const std::filesystem::path& path) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) throw UnsupportedFormat("y4m: cannot open " + path.string());
    std::string header;
    std::getline(in_, header);
    parse_header(header);
    data_start_ = in_.tellg();
    count_frames();
    rewind();
  }

  const VideoMeta& meta() const override { return meta_; }

  std::optional<Frame> next() override {
    if (index_ >= meta_.frame_count) return std::nullopt;
    std::string tag;
    std::getline(in_, tag);
    Frame f{index_, frame_time_ms(index_, meta_.fps), meta_.width, meta_.height, 1, {}};
    f.pixels.resize(static_cast<std::size_t>(meta_.width) * meta_.height);
    in_.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
    in_.seekg(static_cast<std::streamoff>(chroma_bytes_), std::ios::cur);
    ++index_;
    return f;
  }

  void rewind() override {
    in_.clear();
    in_.seekg(data_start_);
    index_ = 0;
  }

 private:
  void parse_header(const std::string& header) {
    std::istringstream tokens(header);
    std::string tok;
    tokens >> tok;
    if (tok != "YUV4MPEG2") throw UnsupportedFormat("y4m: bad magic");
    int w = 0, h = 0;
    Rational fps{0, 0};
    std::string chroma = "420";
    while (tokens >> tok) {
      const char key = tok[0];
      const std::string val = tok.substr(1);
      if (key == 'W') {
        w = std::stoi(val);
      } else if (key == 'H') {
        h = std::stoi(val);
      } else if (key == 'F') {
        const auto colon = val.find(':');
        if (colon == std::string::npos) throw UnsupportedFormat("y4m: malformed frame rate " + val);
        fps = {std::stoll(val.substr(0, colon)), std::stoll(val.substr(colon + 1))};
      } else if (key == 'C') {
        chroma = val;
      }
    }
    if (w <= 0 || h <= 0) throw UnsupportedFormat("y4m: missing or invalid W/H");
    if (fps.num <= 0 || fps.den <= 0) throw UnsupportedFormat("y4m: missing or invalid frame rate");
    if (chroma.rfind("420", 0) == 0) {
      chroma_bytes_ = 2 * static_cast<std::size_t>((w + 1) / 2) * ((h + 1) / 2);
    } else if (chroma == "mono") {
      chroma_bytes_ = 0;
    } else {
      throw UnsupportedFormat("y4m: chroma C" + chroma + " not supported (C420 or Cmono only)");
    }
    meta_ = VideoMeta::make(fps, w, h, 0);
  }

  void count_frames() {
    const auto payload = static_cast<std::uintmax_t>(meta_.width) * meta_.height + chroma_bytes_;
    const auto size = std::filesystem::file_size(path_);
    std::int64_t count = 0;
    std::string tag;
    while (std::getline(in_, tag)) {
      if (tag.rfind("FRAME", 0) != 0) throw UnsupportedFormat("y4m: missing FRAME marker");
      const auto pos = static_cast<std::uintmax_t>(in_.tellg());
      if (pos + payload > size) break;  // truncated trailing frame
      in_.seekg(static_cast<std::streamoff>(payload), std::ios::cur);
      ++count;
    }
    meta_ = VideoMeta::make(meta_.fps, meta_.width, meta_.height, count);
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::streampos data_start_;
  std::size_t chroma_bytes_ = 0;
  VideoMeta meta_;
  std::int64_t index_ = 0;
};

inline std::string frame_file_stem(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06lld", static_cast<long long>(index));
  return buf;
}

/// Directory of `frame_%06d.{png,ppm,pgm}` images plus `meta.json` carrying
/// `fps_num` and optional `fps_den`.
class ImageDirFrameSource final : public FrameSource {
 public:
  explicit ImageDirFrameSource(const std::filesystem::path& dir) : dir_(dir) {
    const auto meta_path = dir / "meta.json";
    if (!std::filesystem::exists(meta_path)) throw MissingMeta("image_dir: no meta.json in " + dir.string());
    nlohmann::json j;
    try {
      std::ifstream in(meta_path);
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw MissingMeta(std::string("image_dir: unreadable meta.json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("fps_num") || !j["fps_num"].is_number_integer()) {
      throw MissingMeta("image_dir: meta.json lacks integer fps_num");
    }
    Rational fps{j["fps_num"].get<std::int64_t>(), j.value("fps_den", std::int64_t{1})};
    if (fps.num <= 0 || fps.den <= 0) throw MissingMeta("image_dir: fps must be positive");

    std::int64_t count = 0;
    while (!find_frame(count).empty()) ++count;
    int w = 0, h = 0;
    if (count > 0) {
      const auto first = image_io::read_image(find_frame(0));
      w = first.width;
      h = first.height;
    }
    meta_ = VideoMeta::make(fps, w, h, count);
  }

  const VideoMeta& meta() const override { return meta_; }

  std::optional<Frame> next() override {
    if (index_ >= meta_.frame_count) return std::nullopt;
    auto img = image_io::read_image(find_frame(index_));
    if (img.width != meta_.width || img.height != meta_.height) {
      throw DimensionMismatch("image_dir: frame " + std::to_string(index_) + " is " + std::to_string(img.width) +
                              "x" + std::to_string(img.height) + ", expected " + std::to_string(meta_.width) + "x" +
                              std::to_string(meta_.height));
    }
    Frame f{index_, frame_time_ms(index_, meta_.fps), img.width, img.height, img.channels, std::move(img.pixels)};
    ++index_;
    return f;
  }

  void rewind() override { index_ = 0; }

 private:
  std::filesystem::path find_frame(std::int64_t index) const {
    const auto stem = frame_file_stem(index);
    for (const char* ext : {".png", ".pgm", ".ppm"}) {
      auto p = dir_ / (stem + ext);
      if (std::filesystem::exists(p)) return p;
    }
    return {};
  }

  std::filesystem::path dir_;
  VideoMeta meta_;
  std::int64_t index_ = 0;
};

inline std::unique_ptr<FrameSource> open_frame_source(const std::filesystem::path& path,
                                                      FormatHint hint = FormatHint::kAuto) {
  if (!std::filesystem::exists(path)) throw UnsupportedFormat("input does not exist: " + path.string());
  if (hint == FormatHint::kImageDir || (hint == FormatHint::kAuto && std::filesystem::is_directory(path))) {
    return std::make_unique<ImageDirFrameSource>(path);
  }
  std::ifstream in(path, std::ios::binary);
  char magic[9] = {};
  in.read(magic, 9);
  if (in.gcount() == 9 && std::string(magic, 9) == "YUV4MPEG2") return std::make_unique<Y4mFrameSource>(path);
  throw UnsupportedFormat("unrecognized input format: " + path.string());
}

/// Consecutive-frame luma differences of the whole source, then shots.
inline std::vector<Shot> detect_shots(FrameSource& source, const ShotParams& params = {}) {
  std::vector<double> diffs;
  std::int64_t count = 0;
  std::optional<LumaPlane> prev;
  source.rewind();
  while (auto f = source.next()) {
    LumaPlane cur = luma_of(*f);
    if (prev) diffs.push_back(mean_abs_diff(*prev, cur));
    prev = std::move(cur);
    ++count;
  }
  return shots_from_diffs(diffs, count, source.meta().fps, params);
}

/// Writes a 4:2:0 Y4M whose Y plane is the frame luma and whose chroma is neutral.
inline void write_y4m(const std::filesystem::path& path, FrameSource& source) {
  const VideoMeta& m = source.meta();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("y4m: cannot write " + path.string());
  out << "YUV4MPEG2 W" << m.width << " H" << m.height << " F" << m.fps.num << ':' << m.fps.den << " Ip A1:1 C420\n";
  const std::string chroma(2 * static_cast<std::size_t>((m.width + 1) / 2) * ((m.height + 1) / 2), '\x80');
  source.rewind();
  while (auto f = source.next()) {
    const LumaPlane y = luma_of(*f);
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(y.data.data()), static_cast<std::streamsize>(y.data.size()));
    out.write(chroma.data(), static_cast<std::streamsize>(chroma.size()));
  }
}

/// Writes `frame_%06d<ext>` images and `meta.json` into `dir`.
inline void write_image_dir(const std::filesystem::path& dir, FrameSource& source, const std::string& ext = ".png") {
  std::filesystem::create_directories(dir);
  const VideoMeta& m = source.meta();
  {
    std::ofstream meta(dir / "meta.json");
    meta << nlohmann::json{{"fps_num", m.fps.num}, {"fps_den", m.fps.den}}.dump() << '\n';
  }
  source.rewind();
  while (auto f = source.next()) {
    image_io::Image img{f->width, f->height, f->channels, std::move(f->pixels)};
    image_io::write_image(dir / (frame_file_stem(f->index) + ext), img);
  }
}

}  // namespace veasyguide
