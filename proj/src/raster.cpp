#include "otdet/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numeric>

namespace otdet {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count(bits.begin(), bits.end(), static_cast<std::uint8_t>(1)));
}

double luma(double r, double g, double b) {
  return std::round(0.299 * r + 0.587 * g + 0.114 * b);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open file: " + path);
  return f;
}

// Skips PGM whitespace and '#' comments, then parses one decimal integer.
int pgm_int(std::FILE* f, const std::string& path) {
  int c = std::fgetc(f);
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    } else if (!std::isspace(c)) {
      break;
    }
    c = std::fgetc(f);
  }
  if (c == EOF || !std::isdigit(c)) throw FormatError("malformed PGM header: " + path);
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 30) throw FormatError("PGM header value out of range: " + path);
    c = std::fgetc(f);
  }
  return value;
}

GrayImage load_pgm(std::FILE* f, const std::string& path) {
  int w = pgm_int(f, path);
  int h = pgm_int(f, path);
  int maxval = pgm_int(f, path);
  if (w < 1 || h < 1) throw FormatError("PGM with empty dimensions: " + path);
  if (maxval < 1 || maxval > 255) throw FormatError("unsupported PGM maxval: " + path);
  GrayImage img(w, h);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w));
  for (int r = 0; r < h; ++r) {
    if (std::fread(row.data(), 1, row.size(), f) != row.size())
      throw FormatError("truncated PGM data: " + path);
    for (int c = 0; c < w; ++c) img.at(r, c) = row[static_cast<std::size_t>(c)];
  }
  return img;
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

GrayImage load_png(std::FILE* f, const std::string& path) {
  PngReader ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("libpng init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw FormatError("corrupt PNG: " + path);

  png_init_io(ctx.png, f);
  png_read_info(ctx.png, ctx.info);

  png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
  png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
  int color = png_get_color_type(ctx.png, ctx.info);
  int depth = png_get_bit_depth(ctx.png, ctx.info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
  if (depth == 16) png_set_strip_16(ctx.png);
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  int channels = png_get_channels(ctx.png, ctx.info);
  if (channels != 1 && channels != 3) throw FormatError("unsupported PNG layout: " + path);
  if (w < 1 || h < 1) throw FormatError("PNG with empty dimensions: " + path);

  std::vector<std::uint8_t> rowbuf(static_cast<std::size_t>(w) * channels);
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 r = 0; r < h; ++r) {
    png_read_row(ctx.png, rowbuf.data(), nullptr);
    for (png_uint_32 c = 0; c < w; ++c) {
      if (channels == 1) {
        img.at(static_cast<int>(r), static_cast<int>(c)) = rowbuf[c];
      } else {
        const std::uint8_t* p = &rowbuf[static_cast<std::size_t>(c) * 3];
        img.at(static_cast<int>(r), static_cast<int>(c)) = luma(p[0], p[1], p[2]);
      }
    }
  }
  png_read_end(ctx.png, nullptr);
  return img;
}

std::uint8_t to_byte(double v) {
  double r = std::round(v);
  if (r < 0.0) r = 0.0;
  if (r > 255.0) r = 255.0;
  return static_cast<std::uint8_t>(r);
}

void write_png(const std::string& path, int width, int height, int color_type,
               const std::vector<std::uint8_t>& data, int channels) {
  FilePtr f = open_file(path, "wb");
  PngWriter ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("libpng init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path);

  png_init_io(ctx.png, f.get());
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  for (int r = 0; r < height; ++r)
    png_write_row(ctx.png, const_cast<png_bytep>(
                               &data[static_cast<std::size_t>(r) * width * channels]));
  png_write_end(ctx.png, nullptr);
}

}  // namespace

GrayImage load_gray(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2) throw FormatError("file too short: " + path);
  if (magic[0] == 'P' && magic[1] == '5') return load_pgm(f.get(), path);
  std::rewind(f.get());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) == 8 && png_sig_cmp(sig, 0, 8) == 0) {
    std::rewind(f.get());
    return load_png(f.get(), path);
  }
  throw FormatError("unrecognized image format: " + path);
}

void save_pgm(const GrayImage& img, const std::string& path) {
  FilePtr f = open_file(path, "wb");
  std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                       "\n255\n";
  if (std::fwrite(header.data(), 1, header.size(), f.get()) != header.size())
    throw IoError("PGM write failed: " + path);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width));
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) row[static_cast<std::size_t>(c)] = to_byte(img.at(r, c));
    if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size())
      throw IoError("PGM write failed: " + path);
  }
}

void save_png_gray(const GrayImage& img, const std::string& path) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(img.width) * img.height);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      data[static_cast<std::size_t>(r) * img.width + c] = to_byte(img.at(r, c));
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, data, 1);
}

void save_png_rgb(const RgbImage& img, const std::string& path) {
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_RGB, img.rgb, 3);
}

RgbImage to_rgb(const GrayImage& img) {
  RgbImage out(img.width, img.height);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      std::uint8_t v = to_byte(img.at(r, c));
      out.set(r, c, v, v, v);
    }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1)
    throw std::invalid_argument("resize_bilinear: dimensions must be >= 1");
  GrayImage out(new_width, new_height);
  double sx = static_cast<double>(img.width) / new_width;
  double sy = static_cast<double>(img.height) / new_height;
  for (int r = 0; r < new_height; ++r) {
    double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    int r0 = static_cast<int>(fy);
    int r1 = std::min(r0 + 1, img.height - 1);
    double wy = fy - r0;
    for (int c = 0; c < new_width; ++c) {
      double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      int c0 = static_cast<int>(fx);
      int c1 = std::min(c0 + 1, img.width - 1);
      double wx = fx - c0;
      double top = img.at(r0, c0) * (1.0 - wx) + img.at(r0, c1) * wx;
      double bot = img.at(r1, c0) * (1.0 - wx) + img.at(r1, c1) * wx;
      out.at(r, c) = top * (1.0 - wy) + bot * wy;
    }
  }
  return out;
}

std::vector<Component> connected_components(const BinaryMask& mask) {
  std::vector<Component> out;
  std::vector<std::int32_t> label(mask.bits.size(), -1);
  std::vector<Pixel> stack;
  int next_id = 0;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      std::size_t idx = static_cast<std::size_t>(r) * mask.width + c;
      if (mask.bits[idx] == 0 || label[idx] >= 0) continue;
      Component comp;
      comp.id = next_id;
      label[idx] = next_id;
      stack.push_back({r, c});
      while (!stack.empty()) {
        Pixel p = stack.back();
        stack.pop_back();
        comp.pixels.push_back(p);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            int nr = p.row + dr, nc = p.col + dc;
            if (!mask.in_bounds(nr, nc)) continue;
            std::size_t nidx = static_cast<std::size_t>(nr) * mask.width + nc;
            if (mask.bits[nidx] == 0 || label[nidx] >= 0) continue;
            label[nidx] = next_id;
            stack.push_back({nr, nc});
          }
      }
      std::sort(comp.pixels.begin(), comp.pixels.end());
      comp.min_row = comp.pixels.front().row;
      comp.max_row = comp.pixels.back().row;
      auto [mn, mx] = std::minmax_element(
          comp.pixels.begin(), comp.pixels.end(),
          [](const Pixel& a, const Pixel& b) { return a.col < b.col; });
      comp.min_col = mn->col;
      comp.max_col = mx->col;
      ++next_id;
      out.push_back(std::move(comp));
    }
  }
  return out;
}

}  // namespace otdet
