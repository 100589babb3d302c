#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dass/synth.hpp"
#include "dass/types.hpp"

namespace dass {

// Self-describing binary container: 8-byte magic "DASSC1\n", a little-endian
// u64 JSON header length, the JSON header (meta + array directory with
// offsets), then tightly packed little-endian payload blobs. Writing the
// same content twice yields identical bytes.
class Container {
 public:
  nlohmann::json meta;

  void add_f64(const std::string& name, const Mat& values);
  void add_i32(const std::string& name, const std::vector<std::int32_t>& values);

  bool has(const std::string& name) const;
  std::vector<std::string> names() const;
  Mat get_f64(const std::string& name) const;
  std::vector<std::int32_t> get_i32(const std::string& name) const;

  std::vector<std::uint8_t> serialize() const;
  static Container deserialize(const std::vector<std::uint8_t>& bytes);

  void write(const std::filesystem::path& path) const;
  static Container read(const std::filesystem::path& path);

 private:
  struct Entry {
    std::string name;
    std::string dtype;  // "f64" or "i32"
    Eigen::Index rows = 0, cols = 0;
    std::vector<double> f64;
    std::vector<std::int32_t> i32;
  };
  const Entry& find(const std::string& name) const;
  std::vector<Entry> entries_;
};

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Scene container: arrays "points", "labels", "box_class", "box_params".
void write_scene(const std::filesystem::path& path, const Scene& scene);
Scene read_scene(const std::filesystem::path& path);

// On-disk corpus: <dir>/train/scene_#####.dsc, <dir>/test/scene_#####.dsc and
// a manifest.json carrying seeds, the generator config echo, per-class point
// counts and a content hash over the scene files.
struct CorpusOnDisk {
  std::vector<Scene> train;
  std::vector<Scene> test;
  nlohmann::json manifest;
};

nlohmann::json write_corpus(const std::filesystem::path& dir,
                            const std::vector<Scene>& train,
                            const std::vector<Scene>& test,
                            const nlohmann::json& gen_config_echo,
                            std::uint64_t seed);
CorpusOnDisk read_corpus(const std::filesystem::path& dir);

}  // namespace dass
