#include "dcdgan/weights_io.hpp"

#include <fstream>
#include <sstream>

#include "dcdgan/errors.hpp"

namespace dcdgan {

namespace fs = std::filesystem;

namespace {

fs::path array_file(const fs::path& dir, const std::string& path) { return dir / (path + ".bin"); }

}  // namespace

ParameterSet round_to_f32(const ParameterSet& params) {
  ParameterSet out;
  for (const auto& [path, p] : params) {
    Tensor t = p.value;
    for (auto& v : t.values()) v = static_cast<double>(static_cast<float>(v));
    out.add(path, std::move(t), p.frozen);
  }
  return out;
}

void save_weights(const ParameterSet& params, const fs::path& dir, Dtype dtype) {
  const ParameterSet stored = dtype == Dtype::f32 ? round_to_f32(params) : params;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream manifest;
  manifest << "# dcdgan weights v1\n";
  manifest << "dtype " << (dtype == Dtype::f32 ? "f32" : "f64") << "\n";
  manifest << "set_digest " << parameter_digest(stored) << "\n";
  for (const auto& [path, p] : stored) {
    const fs::path file = array_file(dir, path);
    fs::create_directories(file.parent_path(), ec);
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError("cannot write " + file.string());
    if (dtype == Dtype::f32) {
      std::vector<float> buf(p.value.values().begin(), p.value.values().end());
      os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
      os.write(reinterpret_cast<const char*>(p.value.data()),
               static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    }
    if (!os) throw IoError("short write to " + file.string());
    const Shape s = p.value.shape();
    manifest << "param " << path << " " << s.n << " " << s.c << " " << s.h << " " << s.w << " "
             << (p.frozen ? 1 : 0) << " " << tensor_digest(path, p.value) << "\n";
  }
  std::ofstream ms(dir / "manifest.txt");
  if (!ms) throw IoError("cannot write " + (dir / "manifest.txt").string());
  ms << manifest.str();
}

WeightsManifest read_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.txt");
  if (!is) throw CorruptionError("missing weights manifest in " + dir.string());
  WeightsManifest m;
  std::string line;
  int lineno = 0;
  bool have_dtype = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dtype") {
      std::string d;
      ls >> d;
      if (d == "f32") {
        m.dtype = Dtype::f32;
      } else if (d == "f64") {
        m.dtype = Dtype::f64;
      } else {
        throw CorruptionError("manifest line " + std::to_string(lineno) + ": unknown dtype " + d);
      }
      have_dtype = true;
    } else if (key == "set_digest") {
      ls >> m.set_digest;
    } else if (key == "param") {
      ManifestEntry e;
      int frozen = 0;
      ls >> e.path >> e.shape.n >> e.shape.c >> e.shape.h >> e.shape.w >> frozen >> e.digest;
      if (!ls) throw CorruptionError("manifest line " + std::to_string(lineno) + " is malformed");
      e.frozen = frozen != 0;
      m.entries.push_back(std::move(e));
    } else {
      throw CorruptionError("manifest line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  if (!have_dtype) throw CorruptionError("manifest in " + dir.string() + " lacks a dtype line");
  return m;
}

ParameterSet load_weights(const fs::path& dir) {
  const WeightsManifest m = read_manifest(dir);
  ParameterSet params;
  for (const auto& e : m.entries) {
    const fs::path file = array_file(dir, e.path);
    std::ifstream is(file, std::ios::binary);
    if (!is) throw CorruptionError("missing array file " + file.string());
    const auto count = static_cast<std::size_t>(e.shape.size());
    std::vector<double> values(count);
    if (m.dtype == Dtype::f32) {
      std::vector<float> buf(count);
      is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * sizeof(float)));
      std::copy(buf.begin(), buf.end(), values.begin());
    } else {
      is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    }
    if (!is || is.peek() != std::char_traits<char>::eof()) {
      throw CorruptionError("array file " + file.string() + " has the wrong size");
    }
    Tensor t(e.shape, std::move(values));
    if (!t.all_finite() || tensor_digest(e.path, t) != e.digest) {
      throw CorruptionError("digest mismatch for " + e.path + " in " + dir.string());
    }
    params.add(e.path, std::move(t), e.frozen);
  }
  if (!m.set_digest.empty() && parameter_digest(params) != m.set_digest) {
    throw CorruptionError("set digest mismatch in " + dir.string());
  }
  return params;
}

}  // namespace dcdgan
