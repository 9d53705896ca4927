#include "dcdgan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "dcdgan/errors.hpp"

namespace dcdgan {

std::uint8_t unit_to_pixel(double v) {
  const double p = std::round((v + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(p, 0.0, 255.0));
}

void quantize_8bit(Tensor& t) {
  for (auto& v : t.values()) v = pixel_to_unit(unit_to_pixel(v));
}

void write_png(const std::filesystem::path& file, const Tensor& img, std::int64_t index) {
  const Shape s = img.shape();
  if (s.c != 1 && s.c != 3) throw ShapeError("write_png: expected 1 or 3 channels, got " + s.str());
  if (index < 0 || index >= s.n) throw ShapeError("write_png: sample index out of range");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(s.w);
  image.height = static_cast<png_uint_32>(s.h);
  image.format = s.c == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(s.c * s.h * s.w));
  for (std::int64_t y = 0; y < s.h; ++y) {
    for (std::int64_t x = 0; x < s.w; ++x) {
      for (std::int64_t c = 0; c < s.c; ++c) {
        buf[static_cast<std::size_t>((y * s.w + x) * s.c + c)] = unit_to_pixel(img.at(index, c, y, x));
      }
    }
  }
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  if (!png_image_write_to_file(&image, file.c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("cannot write " + file.string() + ": " + image.message);
  }
}

Tensor read_png(const std::filesystem::path& file) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, file.c_str())) {
    throw IoError("cannot read image " + file.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode image " + file.string() + ": " + msg);
  }
  const std::int64_t h = image.height;
  const std::int64_t w = image.width;
  Tensor out(Shape{1, 3, h, w});
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < 3; ++c) {
        out.at(0, c, y, x) = pixel_to_unit(buf[static_cast<std::size_t>((y * w + x) * 3 + c)]);
      }
    }
  }
  return out;
}

}  // namespace dcdgan
