#include "dass/container.hpp"

#include <cstring>
#include <fstream>

#include "dass/errors.hpp"

namespace dass {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'S', 'S', 'C', '1', '\n', '\0'};

void append_u64_le(std::uint64_t v, std::vector<std::uint8_t>* out) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void Container::add_f64(const std::string& name, const Mat& values) {
  Entry e;
  e.name = name;
  e.dtype = "f64";
  e.rows = values.rows();
  e.cols = values.cols();
  e.f64.resize(static_cast<std::size_t>(values.size()));
  // Row-major payload regardless of Eigen's storage order.
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) e.f64[k++] = values(r, c);
  entries_.push_back(std::move(e));
}

void Container::add_i32(const std::string& name,
                        const std::vector<std::int32_t>& values) {
  Entry e;
  e.name = name;
  e.dtype = "i32";
  e.rows = static_cast<Eigen::Index>(values.size());
  e.cols = 1;
  e.i32 = values;
  entries_.push_back(std::move(e));
}

bool Container::has(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

std::vector<std::string> Container::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

const Container::Entry& Container::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw DataError("container: missing array '" + name + "'");
}

Mat Container::get_f64(const std::string& name) const {
  const Entry& e = find(name);
  if (e.dtype != "f64") throw DataError("container: '" + name + "' is not f64");
  Mat out(e.rows, e.cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < e.rows; ++r)
    for (Eigen::Index c = 0; c < e.cols; ++c) out(r, c) = e.f64[k++];
  return out;
}

std::vector<std::int32_t> Container::get_i32(const std::string& name) const {
  const Entry& e = find(name);
  if (e.dtype != "i32") throw DataError("container: '" + name + "' is not i32");
  return e.i32;
}

std::vector<std::uint8_t> Container::serialize() const {
  nlohmann::json header;
  header["version"] = 1;
  header["meta"] = meta;
  nlohmann::json dir = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : entries_) {
    const std::uint64_t bytes =
        e.dtype == "f64" ? e.f64.size() * 8 : e.i32.size() * 4;
    dir.push_back({{"name", e.name},
                   {"dtype", e.dtype},
                   {"rows", e.rows},
                   {"cols", e.cols},
                   {"offset", offset},
                   {"bytes", bytes}});
    offset += bytes;
  }
  header["arrays"] = dir;
  const std::string header_str = header.dump();

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  append_u64_le(header_str.size(), &out);
  out.insert(out.end(), header_str.begin(), header_str.end());
  for (const auto& e : entries_) {
    if (e.dtype == "f64") {
      for (double v : e.f64) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        append_u64_le(u, &out);
      }
    } else {
      for (std::int32_t v : e.i32) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        for (int i = 0; i < 4; ++i)
          out.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xff));
      }
    }
  }
  return out;
}

Container Container::deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw FormatError("container: bad magic");
  const std::uint64_t header_len = read_u64_le(bytes.data() + 8);
  if (16 + header_len > bytes.size())
    throw FormatError("container: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16,
                                   bytes.begin() + 16 + static_cast<long>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("container: header parse failed: ") + e.what());
  }

  Container out;
  out.meta = header.value("meta", nlohmann::json::object());
  const std::size_t payload_base = 16 + static_cast<std::size_t>(header_len);
  for (const auto& d : header.at("arrays")) {
    Entry e;
    e.name = d.at("name").get<std::string>();
    e.dtype = d.at("dtype").get<std::string>();
    e.rows = d.at("rows").get<Eigen::Index>();
    e.cols = d.at("cols").get<Eigen::Index>();
    const std::size_t off = payload_base + d.at("offset").get<std::size_t>();
    const std::size_t nbytes = d.at("bytes").get<std::size_t>();
    if (off + nbytes > bytes.size())
      throw FormatError("container: array '" + e.name + "' exceeds payload (offset " +
                        std::to_string(off) + ")");
    if (e.dtype == "f64") {
      e.f64.resize(nbytes / 8);
      for (std::size_t i = 0; i < e.f64.size(); ++i) {
        const std::uint64_t u = read_u64_le(bytes.data() + off + 8 * i);
        std::memcpy(&e.f64[i], &u, 8);
      }
    } else if (e.dtype == "i32") {
      e.i32.resize(nbytes / 4);
      for (std::size_t i = 0; i < e.i32.size(); ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b)
          u |= static_cast<std::uint32_t>(bytes[off + 4 * i + static_cast<std::size_t>(b)])
               << (8 * b);
        std::memcpy(&e.i32[i], &u, 4);
      }
    } else {
      throw FormatError("container: unknown dtype '" + e.dtype + "'");
    }
    out.entries_.push_back(std::move(e));
  }
  return out;
}

void Container::write(const std::filesystem::path& path) const {
  write_file_bytes(path, serialize());
}

Container Container::read(const std::filesystem::path& path) {
  return deserialize(read_file_bytes(path));
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_scene(const std::filesystem::path& path, const Scene& scene) {
  Container c;
  c.meta["kind"] = "scene";
  c.meta["seed"] = scene.seed;
  c.meta["valid_count"] = scene.cloud.valid_count;
  c.add_f64("points", scene.cloud.points);
  c.add_i32("labels", scene.labels);
  std::vector<std::int32_t> cls;
  Mat params(static_cast<Eigen::Index>(scene.boxes.size()), 7);
  for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
    cls.push_back(scene.boxes[i].cls);
    const Box7& b = scene.boxes[i].box;
    params.row(static_cast<Eigen::Index>(i)) << b.x, b.y, b.z, b.h, b.w, b.l, b.r;
  }
  c.add_i32("box_class", cls);
  c.add_f64("box_params", params);
  c.write(path);
}

Scene read_scene(const std::filesystem::path& path) {
  const Container c = Container::read(path);
  if (c.meta.value("kind", "") != "scene")
    throw FormatError("not a scene container: " + path.string());
  Scene s;
  s.seed = c.meta.value("seed", std::uint64_t{0});
  s.cloud.points = c.get_f64("points");
  s.cloud.valid_count = c.meta.value("valid_count", s.cloud.points.rows());
  s.labels = c.get_i32("labels");
  const auto cls = c.get_i32("box_class");
  const Mat params = c.get_f64("box_params");
  for (Eigen::Index i = 0; i < params.rows(); ++i) {
    LabeledBox lb;
    lb.cls = cls[static_cast<std::size_t>(i)];
    lb.box = {params(i, 0), params(i, 1), params(i, 2), params(i, 3),
              params(i, 4), params(i, 5), params(i, 6)};
    s.boxes.push_back(lb);
  }
  s.check();
  return s;
}

namespace {

std::string scene_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05d.dsc", index);
  return buf;
}

}  // namespace

nlohmann::json write_corpus(const std::filesystem::path& dir,
                            const std::vector<Scene>& train,
                            const std::vector<Scene>& test,
                            const nlohmann::json& gen_config_echo,
                            std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "train");
  fs::create_directories(dir / "test");

  std::uint64_t hash = 0xcbf29ce484222325ULL;
  std::vector<std::int64_t> class_counts;
  const auto emit = [&](const std::vector<Scene>& scenes, const fs::path& sub) {
    nlohmann::json files = nlohmann::json::array();
    int idx = 0;
    for (const auto& s : scenes) {
      const std::string name = scene_file_name(idx++);
      write_scene(dir / sub / name, s);
      hash = fnv1a64(read_file_bytes(dir / sub / name), hash);
      files.push_back({{"file", (sub / name).generic_string()}, {"seed", s.seed}});
      for (std::int32_t label : s.labels) {
        if (label < 0) continue;
        if (static_cast<std::size_t>(label) >= class_counts.size())
          class_counts.resize(static_cast<std::size_t>(label) + 1, 0);
        ++class_counts[static_cast<std::size_t>(label)];
      }
    }
    return files;
  };

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["generator"] = gen_config_echo;
  manifest["train"] = emit(train, "train");
  manifest["test"] = emit(test, "test");
  manifest["class_point_counts"] = class_counts;
  manifest["content_hash"] = hash;
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

CorpusOnDisk read_corpus(const std::filesystem::path& dir) {
  CorpusOnDisk out;
  try {
    out.manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest parse failed: " + std::string(e.what()));
  }
  for (const auto& f : out.manifest.at("train"))
    out.train.push_back(read_scene(dir / f.at("file").get<std::string>()));
  for (const auto& f : out.manifest.at("test"))
    out.test.push_back(read_scene(dir / f.at("file").get<std::string>()));
  return out;
}

}  // namespace dass
