#include "shred/example_io.hpp"

#include <bit>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shred/error.hpp"
#include "shred/requests.hpp"

namespace shred {
namespace {

static_assert(std::endian::native == std::endian::little,
              "example shards are written in host byte order");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(const char*& cursor, const char* end) {
  if (static_cast<std::size_t>(end - cursor) < sizeof(T)) {
    throw Error("truncated example record");
  }
  T value;
  std::memcpy(&value, cursor, sizeof(T));
  cursor += sizeof(T);
  return value;
}

std::uint8_t kind_byte(OperatorKind kind) { return static_cast<std::uint8_t>(kind); }

}  // namespace

ExampleRecord to_record(const SplitExample& ex) {
  return {OperatorKind::kSplit, static_cast<std::uint32_t>(ex.point_indices.size()), 6,
          ex.features, ex.targets};
}

ExampleRecord to_record(const FixExample& ex) {
  return {OperatorKind::kFix, static_cast<std::uint32_t>(ex.point_indices.size()), 7,
          ex.features, ex.targets};
}

ExampleRecord to_record(const MergeExample& ex) {
  return {OperatorKind::kMerge, static_cast<std::uint32_t>(ex.point_indices.size()), 8,
          ex.features, {static_cast<std::uint8_t>(ex.label)}};
}

void write_record(std::ostream& out, const ExampleRecord& r) {
  if (r.features.size() != std::size_t{r.points} * r.features_per_point) {
    throw Error("feature count does not match points x features");
  }
  const std::size_t payload = 1 + 4 + 1 + 4 * r.features.size() + 4 + r.labels.size();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(payload));
  put<std::uint8_t>(out, kind_byte(r.kind));
  put<std::uint32_t>(out, r.points);
  put<std::uint8_t>(out, r.features_per_point);
  out.write(reinterpret_cast<const char*>(r.features.data()),
            static_cast<std::streamsize>(4 * r.features.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(r.labels.size()));
  out.write(reinterpret_cast<const char*>(r.labels.data()),
            static_cast<std::streamsize>(r.labels.size()));
}

bool read_record(std::istream& in, ExampleRecord& r) {
  std::uint32_t payload = 0;
  in.read(reinterpret_cast<char*>(&payload), sizeof(payload));
  if (in.gcount() == 0 && in.eof()) return false;
  if (in.gcount() != sizeof(payload)) throw Error("truncated example record");
  std::vector<char> buf(payload);
  in.read(buf.data(), payload);
  if (static_cast<std::uint32_t>(in.gcount()) != payload) {
    throw Error("truncated example record");
  }
  const char* cur = buf.data();
  const char* end = cur + payload;
  const auto kind = take<std::uint8_t>(cur, end);
  if (kind > 2) throw Error("bad example kind " + std::to_string(kind));
  r.kind = static_cast<OperatorKind>(kind);
  r.points = take<std::uint32_t>(cur, end);
  r.features_per_point = take<std::uint8_t>(cur, end);
  r.features.resize(std::size_t{r.points} * r.features_per_point);
  for (auto& f : r.features) f = take<float>(cur, end);
  r.labels.resize(take<std::uint32_t>(cur, end));
  for (auto& l : r.labels) l = take<std::uint8_t>(cur, end);
  if (cur != end) throw Error("trailing bytes in example record");
  return true;
}

std::vector<ExampleRecord> read_shard(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open shard " + path.string());
  std::vector<ExampleRecord> out;
  ExampleRecord r;
  while (read_record(in, r)) out.push_back(r);
  return out;
}

ShardWriter::ShardWriter(std::filesystem::path dir, std::string prefix,
                         std::size_t per_shard)
    : dir_(std::move(dir)), prefix_(std::move(prefix)), per_shard_(per_shard) {
  if (per_shard_ == 0) throw Error("shard size must be positive");
  std::filesystem::create_directories(dir_);
}

void ShardWriter::write(const ExampleRecord& record) {
  if (shards_.empty() || shards_.back().count == per_shard_) {
    if (out_.is_open()) out_.close();
    std::ostringstream name;
    name << prefix_ << '-' << std::setw(5) << std::setfill('0') << shards_.size()
         << ".bin";
    shards_.push_back({name.str(), 0});
    out_.open(dir_ / name.str(), std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot write shard " + (dir_ / name.str()).string());
  }
  write_record(out_, record);
  ++shards_.back().count;
  ++total_;
}

std::vector<ShardInfo> ShardWriter::finish() {
  if (out_.is_open()) out_.close();
  return shards_;
}

std::string manifest_to_json(const ShardManifest& m) {
  nlohmann::ordered_json j;
  j["format_version"] = m.format_version;
  j["kind"] = std::string(to_string(m.kind));
  j["counts"] = {{"total", m.total}, {"rejected", m.rejected}};
  j["shards"] = nlohmann::ordered_json::array();
  for (const auto& s : m.shards) j["shards"].push_back({{"file", s.file}, {"count", s.count}});
  j["shapes"] = m.shapes;
  j["seeds"] = m.seeds;
  j["config"] = nlohmann::ordered_json::parse(m.config_json);
  j["stats"] = nlohmann::ordered_json::parse(m.stats_json);
  return j.dump(2) + "\n";
}

ShardManifest manifest_from_json(const std::string& text) {
  ShardManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.format_version = j.at("format_version").get<int>();
    m.kind = parse_operator_kind(j.at("kind").get<std::string>());
    m.total = j.at("counts").at("total").get<std::size_t>();
    m.rejected = j.at("counts").at("rejected").get<std::size_t>();
    for (const auto& s : j.at("shards")) {
      m.shards.push_back({s.at("file").get<std::string>(), s.at("count").get<std::size_t>()});
    }
    m.shapes = j.at("shapes").get<std::vector<std::string>>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.config_json = j.at("config").dump();
    m.stats_json = j.at("stats").dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad shard manifest: ") + e.what());
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const ShardManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << manifest_to_json(manifest);
}

ShardManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

}  // namespace shred
