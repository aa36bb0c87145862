#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "shred/score_file.hpp"
#include "shred/synthgen.hpp"

namespace shred {

inline constexpr int kExampleFormatVersion = 1;
inline constexpr std::size_t kExamplesPerShard = 10000;

/// One training example as stored on disk:
///   u32 payload length | u8 kind | u32 points | u8 features per point |
///   f32 features[points * features] | u32 label count | u8 labels[count]
/// All integers and floats little-endian.
struct ExampleRecord {
  OperatorKind kind = OperatorKind::kSplit;
  std::uint32_t points = 0;
  std::uint8_t features_per_point = 0;
  std::vector<float> features;
  std::vector<std::uint8_t> labels;

  friend bool operator==(const ExampleRecord&, const ExampleRecord&) = default;
};

ExampleRecord to_record(const SplitExample& ex);
ExampleRecord to_record(const FixExample& ex);
ExampleRecord to_record(const MergeExample& ex);

void write_record(std::ostream& out, const ExampleRecord& record);
/// Returns false at a clean end of stream; throws on truncation.
bool read_record(std::istream& in, ExampleRecord& record);
std::vector<ExampleRecord> read_shard(const std::filesystem::path& path);

struct ShardInfo {
  std::string file;  // relative to the output directory
  std::size_t count = 0;
};

/// Streams records into `<dir>/<prefix>-NNNNN.bin`, rolling over every
/// `per_shard` records.
class ShardWriter {
 public:
  ShardWriter(std::filesystem::path dir, std::string prefix,
              std::size_t per_shard = kExamplesPerShard);
  void write(const ExampleRecord& record);
  /// Closes the open shard and returns the shard list.
  std::vector<ShardInfo> finish();
  std::size_t total() const { return total_; }

 private:
  std::filesystem::path dir_;
  std::string prefix_;
  std::size_t per_shard_;
  std::size_t total_ = 0;
  std::vector<ShardInfo> shards_;
  std::ofstream out_;
};

struct ShardManifest {
  OperatorKind kind = OperatorKind::kSplit;
  std::size_t total = 0;
  std::size_t rejected = 0;
  std::vector<ShardInfo> shards;
  std::vector<std::string> shapes;
  std::vector<std::uint64_t> seeds;  // one per shape
  std::string config_json = "{}";    // embedded verbatim
  std::string stats_json = "{}";
  int format_version = kExampleFormatVersion;
};

std::string manifest_to_json(const ShardManifest& manifest);
ShardManifest manifest_from_json(const std::string& text);
void save_manifest(const std::filesystem::path& path, const ShardManifest& manifest);
ShardManifest load_manifest(const std::filesystem::path& path);

}  // namespace shred
