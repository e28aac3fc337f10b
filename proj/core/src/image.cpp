#include "homoflow/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include <png.h>

#include "homoflow/error.hpp"

namespace homoflow {

namespace fs = std::filesystem;

GrayFrame::GrayFrame(int w, int h, float fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
  if (w <= 0 || h <= 0) throw InvalidInput("frame dimensions must be positive");
}

double GrayFrame::sample(double x, double y, double outside) const {
  if (!(x >= 0.0 && y >= 0.0 && x <= width - 1.0 && y <= height - 1.0)) return outside;
  const int x0 = std::min(static_cast<int>(x), width - 2 < 0 ? 0 : width - 2);
  const int y0 = std::min(static_cast<int>(y), height - 2 < 0 ? 0 : height - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
  const double bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

GrayFrame downsample_area(const GrayFrame& f, int width, int height) {
  GrayFrame out(width, height);
  const double sx = static_cast<double>(f.width) / width;
  const double sy = static_cast<double>(f.height) / height;
  for (int oy = 0; oy < height; ++oy) {
    const double y0 = oy * sy, y1 = (oy + 1) * sy;
    for (int ox = 0; ox < width; ++ox) {
      const double x0 = ox * sx, x1 = (ox + 1) * sx;
      double acc = 0.0, area = 0.0;
      for (int y = static_cast<int>(y0); y < std::min<int>(static_cast<int>(std::ceil(y1)), f.height); ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        if (wy <= 0) continue;
        for (int x = static_cast<int>(x0); x < std::min<int>(static_cast<int>(std::ceil(x1)), f.width); ++x) {
          const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
          if (wx <= 0) continue;
          acc += wx * wy * f.at(x, y);
          area += wx * wy;
        }
      }
      out.at(ox, oy) = static_cast<float>(area > 0 ? acc / area : 0.0);
    }
  }
  return out;
}

GrayFrame warp_frame(const GrayFrame& src, const Homography& out_to_src, int width, int height,
                     double outside) {
  GrayFrame out(width, height);
  const Mat3& m = out_to_src.matrix();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
      if (std::abs(w) <= kProjectionEps) {
        out.at(x, y) = static_cast<float>(outside);
        continue;
      }
      const double u = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w;
      const double v = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w;
      out.at(x, y) = static_cast<float>(src.sample(u, v, outside));
    }
  }
  return out;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

namespace {

GrayFrame read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  auto token = [&in]() {
    std::string t;
    while (in >> t) {
      if (t[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return t;
    }
    throw InvalidInput("truncated PGM header");
  };
  if (token() != "P5") throw InvalidInput("only binary PGM (P5) is supported: " + path.string());
  const int w = std::stoi(token());
  const int h = std::stoi(token());
  const int maxval = std::stoi(token());
  in.get();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw InvalidInput("bad PGM header");
  GrayFrame f(w, h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (maxval < 256) {
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (!in) throw InvalidInput("truncated PGM data: " + path.string());
    for (std::size_t i = 0; i < n; ++i) f.pixels[i] = static_cast<float>(buf[i] / double(maxval));
  } else {
    std::vector<unsigned char> buf(2 * n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
    if (!in) throw InvalidInput("truncated PGM data: " + path.string());
    for (std::size_t i = 0; i < n; ++i)
      f.pixels[i] = static_cast<float>((buf[2 * i] * 256 + buf[2 * i + 1]) / double(maxval));
  }
  return f;
}

GrayFrame read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw InvalidInput("cannot read PNG " + path.string() + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw InvalidInput("cannot decode PNG " + path.string());
  }
  GrayFrame f(static_cast<int>(image.width), static_cast<int>(image.height));
  const std::size_t n = f.pixels.size();
  for (std::size_t i = 0; i < n; ++i) {
    double v;
    if (color) {
      v = (0.299 * buf[3 * i] + 0.587 * buf[3 * i + 1] + 0.114 * buf[3 * i + 2]) / 255.0;
    } else {
      v = buf[i] / 255.0;
    }
    f.pixels[i] = static_cast<float>(v);
  }
  return f;
}

void write_png_raw(const fs::path& path, int w, int h, std::uint32_t format, const void* data) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr))
    throw InvalidInput("cannot write PNG " + path.string() + ": " + image.message);
}

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

}  // namespace

GrayFrame read_frame(const fs::path& path) {
  const auto ext = lower_ext(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw InvalidInput("unsupported frame format: " + path.string());
}

void write_png(const fs::path& path, const GrayFrame& frame) {
  std::vector<std::uint8_t> bytes(frame.pixels.size());
  std::transform(frame.pixels.begin(), frame.pixels.end(), bytes.begin(),
                 [](float v) { return to_byte(v); });
  write_png_raw(path, frame.width, frame.height, PNG_FORMAT_GRAY, bytes.data());
}

void write_png(const fs::path& path, const RgbImage& image) {
  write_png_raw(path, image.width, image.height, PNG_FORMAT_RGB, image.data.data());
}

void write_pgm(const fs::path& path, const GrayFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  for (float v : frame.pixels) out.put(static_cast<char>(to_byte(v)));
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = lower_ext(entry.path());
    if (ext == ".png" || ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

}  // namespace homoflow
