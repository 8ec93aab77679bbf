#pragma once

#include <png.h>

#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "veasyguide/error.hpp"

namespace veasyguide::image_io {

/// Decoded still image; `channels` is 1 (gray) or 3 (RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
};

inline Image read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw UnsupportedFormat("png: " + path.string() + ": " + img.message);
  }
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Image out{static_cast<int>(img.width), static_cast<int>(img.height), gray ? 1 : 3, {}};
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw UnsupportedFormat("png: " + path.string() + ": " + img.message);
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const Image& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = image.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.pixels.data(), 0, nullptr)) {
    throw Error("png: cannot write " + path.string() + ": " + img.message);
  }
}

namespace detail {

inline int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      break;
    }
    c = in.peek();
  }
  int v = -1;
  if (!(in >> v)) throw UnsupportedFormat("pnm: malformed header");
  return v;
}

}  // namespace detail

/// Binary PGM (P5) or PPM (P6) with maxval 255.
inline Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnsupportedFormat("pnm: cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw UnsupportedFormat("pnm: " + path.string() + ": only binary P5/P6 supported");
  }
  Image out;
  out.channels = magic[1] == '5' ? 1 : 3;
  out.width = detail::read_pnm_int(in);
  out.height = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (out.width <= 0 || out.height <= 0 || maxval != 255) {
    throw UnsupportedFormat("pnm: " + path.string() + ": unsupported dimensions or maxval");
  }
  in.get();  // single whitespace before raster
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
  in.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(out.pixels.size()));
  if (!in) throw UnsupportedFormat("pnm: " + path.string() + ": truncated raster");
  return out;
}

inline void write_pnm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("pnm: cannot write " + path.string());
  out << (image.channels == 1 ? "P5" : "P6") << '\n' << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

/// Dispatches on the extension: .png, .pgm or .ppm.
inline Image read_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
  throw UnsupportedFormat("unsupported image extension: " + path.string());
}

inline void write_image(const std::filesystem::path& path, const Image& image) {
  const auto ext = path.extension().string();
  if (ext == ".png") return write_png(path, image);
  if (ext == ".pgm" || ext == ".ppm") return write_pnm(path, image);
  throw UnsupportedFormat("unsupported image extension: " + path.string());
}

}  // namespace veasyguide::image_io
