#include "dcdgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dcdgan/errors.hpp"
#include "dcdgan/image_io.hpp"
#include "dcdgan/ops.hpp"
#include "dcdgan/params.hpp"

namespace dcdgan {

namespace fs = std::filesystem;

namespace {

struct Rgb {
  double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0);
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  Rgb rgb{0, 0, 0};
  if (hp < 1) rgb = {c, x, 0};
  else if (hp < 2) rgb = {x, c, 0};
  else if (hp < 3) rgb = {0, c, x};
  else if (hp < 4) rgb = {0, x, c};
  else if (hp < 5) rgb = {x, 0, c};
  else rgb = {c, 0, x};
  const double m = v - c;
  return {rgb.r + m, rgb.g + m, rgb.b + m};
}

struct Blob {
  bool ellipse = true;
  double cx = 0, cy = 0;
  double rx = 0, ry = 0, angle = 0;
  std::vector<std::pair<double, double>> poly;

  bool contains(double x, double y) const {
    if (ellipse) {
      const double dx = x - cx, dy = y - cy;
      const double c = std::cos(angle), s = std::sin(angle);
      const double u = (c * dx + s * dy) / rx;
      const double v = (-s * dx + c * dy) / ry;
      return u * u + v * v <= 1.0;
    }
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
      const auto [xi, yi] = poly[i];
      const auto [xj, yj] = poly[j];
      if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
    }
    return inside;
  }
};

Blob random_blob(Rng& rng, int res) {
  Blob b;
  b.ellipse = rng.uniform() < 0.5;
  b.cx = rng.uniform(0.2, 0.8) * res;
  b.cy = rng.uniform(0.2, 0.8) * res;
  if (b.ellipse) {
    b.rx = rng.uniform(0.1, 0.3) * res;
    b.ry = rng.uniform(0.1, 0.3) * res;
    b.angle = rng.uniform(0.0, std::numbers::pi);
  } else {
    const auto k = rng.uniform_int(3, 6);
    std::vector<double> angles;
    for (std::int64_t i = 0; i < k; ++i) angles.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
    std::sort(angles.begin(), angles.end());
    for (double a : angles) {
      const double r = rng.uniform(0.12, 0.3) * res;
      b.poly.emplace_back(b.cx + r * std::cos(a), b.cy + r * std::sin(a));
    }
  }
  return b;
}

// Renders 1-4 blobs; label 0 is background, label i is the i-th blob (later
// blobs paint over earlier ones).
std::vector<int> render_labels(const std::vector<Blob>& blobs, int res) {
  std::vector<int> labels(static_cast<std::size_t>(res * res), 0);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      for (std::size_t i = 0; i < blobs.size(); ++i) {
        if (blobs[i].contains(x + 0.5, y + 0.5)) labels[static_cast<std::size_t>(y * res + x)] = static_cast<int>(i) + 1;
      }
    }
  }
  return labels;
}

Tensor paint(const std::vector<int>& labels, const std::vector<Rgb>& colors, Rgb background, int res) {
  Tensor img(Shape{1, 3, res, res});
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const int l = labels[static_cast<std::size_t>(y * res + x)];
      const Rgb c = l == 0 ? background : colors[static_cast<std::size_t>(l - 1)];
      img.at(0, 0, y, x) = 2.0 * c.r - 1.0;
      img.at(0, 1, y, x) = 2.0 * c.g - 1.0;
      img.at(0, 2, y, x) = 2.0 * c.b - 1.0;
    }
  }
  quantize_8bit(img);
  return img;
}

std::vector<Blob> random_scene(Rng& rng, int res) {
  const auto count = rng.uniform_int(1, 4);
  std::vector<Blob> blobs;
  for (std::int64_t i = 0; i < count; ++i) blobs.push_back(random_blob(rng, res));
  return blobs;
}

void validate_resolution(int resolution) {
  if (resolution < 4 || resolution % 4 != 0) throw ConfigError("resolution must be a positive multiple of 4");
}

Tensor resize_item(const Tensor& img, int resolution) {
  if (img.shape().h == resolution && img.shape().w == resolution) return img;
  Tape tape;
  return ops::resize_bilinear(tape.constant(img), resolution, resolution).value();
}

std::vector<fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string item_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.png", i);
  return buf;
}

}  // namespace

DatasetSpec DatasetSpec::from_config(const RunConfig& cfg) {
  DatasetSpec s;
  s.task = cfg.data.task;
  s.resolution = cfg.data.resolution;
  s.n_train = cfg.data.n_train;
  s.n_eval = cfg.data.n_eval;
  s.seed = cfg.seed;
  s.hue_offset = cfg.data.hue_offset;
  s.folder_a = cfg.data.folder_a;
  s.folder_b = cfg.data.folder_b;
  s.paired = cfg.data.paired;
  return s;
}

std::string DatasetSpec::echo() const {
  std::ostringstream os;
  os << "task = " << to_string(task) << "\n";
  os << "resolution = " << resolution << "\n";
  os << "n_train = " << n_train << "\n";
  os << "n_eval = " << n_eval << "\n";
  os << "seed = " << seed.value << "\n";
  os << "hue_offset = " << format_double(hue_offset) << "\n";
  if (task == Task::folder) {
    os << "folder_a = " << folder_a << "\n";
    os << "folder_b = " << folder_b << "\n";
    os << "paired = " << (paired ? "true" : "false") << "\n";
  }
  return os.str();
}

void DatasetSpec::validate() const {
  validate_resolution(resolution);
  if (n_train < 1 || n_eval < 1) throw ConfigError("n_train and n_eval must be >= 1");
  if (task == Task::folder && (folder_a.empty() || folder_b.empty())) {
    throw ConfigError("folder task requires folder_a and folder_b");
  }
}

Tensor edge_map(const std::vector<int>& labels, int res) {
  Tensor x(Shape{1, 3, res, res}, -1.0);
  for (int y = 0; y < res; ++y) {
    for (int xx = 0; xx < res; ++xx) {
      const int l = labels[static_cast<std::size_t>(y * res + xx)];
      bool edge = false;
      if (xx + 1 < res && labels[static_cast<std::size_t>(y * res + xx + 1)] != l) edge = true;
      if (xx > 0 && labels[static_cast<std::size_t>(y * res + xx - 1)] != l) edge = true;
      if (y + 1 < res && labels[static_cast<std::size_t>((y + 1) * res + xx)] != l) edge = true;
      if (y > 0 && labels[static_cast<std::size_t>((y - 1) * res + xx)] != l) edge = true;
      if (edge) {
        for (int c = 0; c < 3; ++c) x.at(0, c, y, xx) = 1.0;
      }
    }
  }
  return x;
}

Split gen_paired_split(int resolution, int count, std::uint64_t seed) {
  validate_resolution(resolution);
  Rng rng(seed);
  Split out;
  for (int i = 0; i < count; ++i) {
    const std::vector<Blob> blobs = random_scene(rng, resolution);
    std::vector<Rgb> colors;
    for (std::size_t b = 0; b < blobs.size(); ++b) {
      colors.push_back(hsv_to_rgb(rng.uniform(0.0, 360.0), rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0)));
    }
    const std::vector<int> labels = render_labels(blobs, resolution);
    out.a.push_back(edge_map(labels, resolution));
    out.b.push_back(paint(labels, colors, Rgb{1.0, 1.0, 1.0}, resolution));
  }
  return out;
}

Split gen_unpaired_split(int resolution, int count, std::uint64_t seed, double hue_offset) {
  validate_resolution(resolution);
  auto domain = [&](std::uint64_t s, double hue_centre) {
    Rng rng(s);
    std::vector<Tensor> items;
    for (int i = 0; i < count; ++i) {
      const std::vector<Blob> blobs = random_scene(rng, resolution);
      std::vector<Rgb> colors;
      for (std::size_t b = 0; b < blobs.size(); ++b) {
        colors.push_back(
            hsv_to_rgb(hue_centre + rng.uniform(-25.0, 25.0), rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0)));
      }
      items.push_back(paint(render_labels(blobs, resolution), colors, Rgb{0.5, 0.5, 0.5}, resolution));
    }
    return items;
  };
  Split out;
  out.a = domain(derive_seed(seed, "domain_a"), kDomainAHue);
  out.b = domain(derive_seed(seed, "domain_b"), kDomainAHue + hue_offset);
  return out;
}

std::vector<Tensor> load_image_folder(const fs::path& dir, int resolution) {
  validate_resolution(resolution);
  const std::vector<fs::path> files = png_files(dir);
  if (files.empty()) throw IoError("no .png images in " + dir.string());
  std::vector<Tensor> out;
  for (const auto& f : files) out.push_back(resize_item(read_png(f), resolution));
  return out;
}

Dataset make_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  const std::uint64_t train_seed = derive_seed(spec.seed.value, "data_train");
  const std::uint64_t eval_seed = derive_seed(spec.seed.value, "data_eval");
  switch (spec.task) {
    case Task::paired_edges2blobs:
      ds.paired = true;
      ds.train = gen_paired_split(spec.resolution, spec.n_train, train_seed);
      ds.eval = gen_paired_split(spec.resolution, spec.n_eval, eval_seed);
      break;
    case Task::unpaired_palette_shift:
      ds.paired = false;
      ds.train = gen_unpaired_split(spec.resolution, spec.n_train, train_seed, spec.hue_offset);
      ds.eval = gen_unpaired_split(spec.resolution, spec.n_eval, eval_seed, spec.hue_offset);
      break;
    case Task::folder: {
      ds.paired = spec.paired;
      std::vector<Tensor> a = load_image_folder(spec.folder_a, spec.resolution);
      std::vector<Tensor> b = load_image_folder(spec.folder_b, spec.resolution);
      if (spec.paired && a.size() != b.size()) throw ConfigError("paired folders hold different image counts");
      const std::size_t need = static_cast<std::size_t>(spec.n_train + spec.n_eval);
      if (a.size() < need || b.size() < need) {
        throw ConfigError("folders hold fewer images than n_train + n_eval");
      }
      auto take = [](const std::vector<Tensor>& v, std::size_t from, std::size_t n) {
        return std::vector<Tensor>(v.begin() + static_cast<std::ptrdiff_t>(from),
                                   v.begin() + static_cast<std::ptrdiff_t>(from + n));
      };
      ds.train = Split{take(a, 0, spec.n_train), take(b, 0, spec.n_train)};
      ds.eval = Split{take(a, spec.n_train, spec.n_eval), take(b, spec.n_train, spec.n_eval)};
      break;
    }
  }
  return ds;
}

std::string dataset_content_digest(const fs::path& dir) {
  std::string bytes;
  for (const char* split : {"train", "eval"}) {
    for (const char* dom : {"a", "b"}) {
      const fs::path sub = dir / split / dom;
      if (!fs::exists(sub)) continue;
      for (const auto& f : png_files(sub)) {
        std::ifstream is(f, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        bytes += fs::relative(f, dir).generic_string();
        bytes.push_back('\0');
        const std::string content = ss.str();
        bytes += std::to_string(content.size());
        bytes.push_back('\0');
        bytes += content;
      }
    }
  }
  return sha256_hex(bytes);
}

std::string write_dataset(const Dataset& ds, const DatasetSpec& spec, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto dump = [&](const std::vector<Tensor>& items, const fs::path& sub) {
    fs::create_directories(sub);
    for (std::size_t i = 0; i < items.size(); ++i) write_png(sub / item_name(i), items[i]);
  };
  dump(ds.train.a, dir / "train" / "a");
  dump(ds.train.b, dir / "train" / "b");
  dump(ds.eval.a, dir / "eval" / "a");
  dump(ds.eval.b, dir / "eval" / "b");
  const std::string digest = dataset_content_digest(dir);
  std::ofstream ms(dir / "manifest.txt");
  if (!ms) throw IoError("cannot write dataset manifest in " + dir.string());
  ms << "# dcdgan dataset v1\n" << spec.echo() << "paired_items = " << (ds.paired ? "true" : "false") << "\n"
     << "content_digest = " << digest << "\n";
  return digest;
}

Dataset read_dataset(const fs::path& dir, DatasetSpec* spec_out) {
  std::ifstream ms(dir / "manifest.txt");
  if (!ms) throw IoError("missing dataset manifest in " + dir.string());
  DatasetSpec spec;
  std::string digest;
  bool paired = true;
  std::string line;
  while (std::getline(ms, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw CorruptionError("malformed dataset manifest line: " + line);
    const std::string k = line.substr(0, eq);
    const std::string v = line.substr(eq + 3);
    if (k == "task") spec.task = parse_task(v);
    else if (k == "resolution") spec.resolution = std::stoi(v);
    else if (k == "n_train") spec.n_train = std::stoi(v);
    else if (k == "n_eval") spec.n_eval = std::stoi(v);
    else if (k == "seed") spec.seed.value = std::stoull(v);
    else if (k == "hue_offset") spec.hue_offset = std::stod(v);
    else if (k == "folder_a") spec.folder_a = v;
    else if (k == "folder_b") spec.folder_b = v;
    else if (k == "paired") spec.paired = v == "true";
    else if (k == "paired_items") paired = v == "true";
    else if (k == "content_digest") digest = v;
    else throw CorruptionError("unknown dataset manifest key " + k);
  }
  if (dataset_content_digest(dir) != digest) throw CorruptionError("dataset content digest mismatch in " + dir.string());
  Dataset ds;
  ds.paired = paired;
  ds.train.a = load_image_folder(dir / "train" / "a", spec.resolution);
  ds.train.b = load_image_folder(dir / "train" / "b", spec.resolution);
  ds.eval.a = load_image_folder(dir / "eval" / "a", spec.resolution);
  ds.eval.b = load_image_folder(dir / "eval" / "b", spec.resolution);
  if (spec_out) *spec_out = spec;
  return ds;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, std::int64_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(shuffle_seed, "epoch" + std::to_string(epoch)));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::size_t batches_per_epoch(std::size_t n, int batch_size) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (static_cast<std::size_t>(batch_size) > n) {
    throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds dataset size " + std::to_string(n));
  }
  return n / static_cast<std::size_t>(batch_size);
}

Tensor gather_batch(std::span<const Tensor> items, const std::vector<std::size_t>& order, std::size_t batch_index,
                    int batch_size) {
  std::vector<Tensor> picked;
  for (int j = 0; j < batch_size; ++j) picked.push_back(items[order[batch_index * batch_size + j]]);
  return stack(picked);
}

std::vector<Tensor> batch_iterator(std::span<const Tensor> items, int batch_size, std::uint64_t shuffle_seed,
                                   std::int64_t epoch) {
  const std::size_t nb = batches_per_epoch(items.size(), batch_size);
  const std::vector<std::size_t> order = epoch_order(items.size(), shuffle_seed, epoch);
  std::vector<Tensor> out;
  for (std::size_t b = 0; b < nb; ++b) out.push_back(gather_batch(items, order, b, batch_size));
  return out;
}

double mean_hue(std::span<const Tensor> images, double min_saturation) {
  double sx = 0.0, sy = 0.0;
  for (const auto& img : images) {
    const Shape s = img.shape();
    for (std::int64_t n = 0; n < s.n; ++n) {
      for (std::int64_t y = 0; y < s.h; ++y) {
        for (std::int64_t x = 0; x < s.w; ++x) {
          const double r = (img.at(n, 0, y, x) + 1.0) / 2.0;
          const double g = (img.at(n, 1, y, x) + 1.0) / 2.0;
          const double b = (img.at(n, 2, y, x) + 1.0) / 2.0;
          const double mx = std::max({r, g, b});
          const double mn = std::min({r, g, b});
          if (mx <= 0.0 || (mx - mn) / mx < min_saturation) continue;
          const double d = mx - mn;
          double h = 0.0;
          if (mx == r) h = 60.0 * std::fmod((g - b) / d, 6.0);
          else if (mx == g) h = 60.0 * ((b - r) / d + 2.0);
          else h = 60.0 * ((r - g) / d + 4.0);
          const double rad = h * std::numbers::pi / 180.0;
          sx += std::cos(rad);
          sy += std::sin(rad);
        }
      }
    }
  }
  double deg = std::atan2(sy, sx) * 180.0 / std::numbers::pi;
  if (deg < 0) deg += 360.0;
  return deg;
}

}  // namespace dcdgan
