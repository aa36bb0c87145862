#include "shred/score_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>

#include "shred/error.hpp"

namespace shred {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kSplit: return "split";
    case OperatorKind::kFix: return "fix";
    case OperatorKind::kMerge: return "merge";
  }
  return "unknown";
}

OperatorKind parse_operator_kind(std::string_view text) {
  if (text == "split") return OperatorKind::kSplit;
  if (text == "fix") return OperatorKind::kFix;
  if (text == "merge") return OperatorKind::kMerge;
  throw Error("unknown operator kind '" + std::string(text) + "'");
}

std::string digest_hex(std::uint64_t digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[digest & 0xfU];
    digest >>= 4;
  }
  return out;
}

std::uint64_t parse_digest_hex(std::string_view hex) {
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
  if (hex.size() != 16 || ec != std::errc() || ptr != hex.data() + hex.size()) {
    throw ScoreFileError("malformed digest '" + std::string(hex) + "'");
  }
  return value;
}

std::string to_json_line(const ScoreRecord& record) {
  ordered_json j;
  j["kind"] = to_string(record.kind);
  j["shape"] = record.shape_id;
  j["seq"] = record.seq;
  j["digest"] = digest_hex(record.digest);
  switch (record.kind) {
    case OperatorKind::kSplit: j["labels"] = record.labels; break;
    case OperatorKind::kFix: j["probs"] = record.probs; break;
    case OperatorKind::kMerge: j["score"] = record.score; break;
  }
  return j.dump();
}

ScoreRecord parse_score_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ScoreRecord r;
    r.kind = parse_operator_kind(j.at("kind").get<std::string>());
    r.shape_id = j.at("shape").get<std::string>();
    r.seq = j.at("seq").get<std::uint64_t>();
    r.digest = parse_digest_hex(j.at("digest").get<std::string>());
    switch (r.kind) {
      case OperatorKind::kSplit:
        r.labels = j.at("labels").get<std::vector<std::uint8_t>>();
        break;
      case OperatorKind::kFix:
        for (const auto& p : j.at("probs")) r.probs.push_back(p.get<float>());
        break;
      case OperatorKind::kMerge:
        r.score = static_cast<float>(j.at("score").get<double>());
        break;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ScoreFileError(std::string("malformed score record: ") + e.what());
  } catch (const ScoreFileError&) {
    throw;
  } catch (const Error& e) {
    throw ScoreFileError(std::string("malformed score record: ") + e.what());
  }
}

std::vector<ScoreRecord> read_score_records(std::istream& in) {
  std::vector<ScoreRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_score_line(line));
  }
  return out;
}

std::vector<ScoreRecord> read_score_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScoreFileError("cannot open score file " + path.string());
  return read_score_records(in);
}

void write_score_records(std::ostream& out,
                         const std::vector<ScoreRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

ScoreBook::ScoreBook(std::vector<ScoreRecord> records) {
  for (auto& r : records) {
    streams_[{r.shape_id, r.kind}].push_back(std::move(r));
  }
  for (auto& [key, stream] : streams_) {
    std::stable_sort(stream.begin(), stream.end(),
                     [](const auto& a, const auto& b) { return a.seq < b.seq; });
    for (std::size_t i = 1; i < stream.size(); ++i) {
      if (stream[i].seq == stream[i - 1].seq) {
        throw ScoreFileError("score file repeats seq " +
                             std::to_string(stream[i].seq) + " for shape '" +
                             key.first + "'");
      }
    }
  }
}

ScoreBook ScoreBook::load(const std::filesystem::path& path) {
  return ScoreBook(read_score_file(path));
}

const std::vector<ScoreRecord>& ScoreBook::stream(const std::string& shape_id,
                                                  OperatorKind kind) const {
  static const std::vector<ScoreRecord> kEmpty;
  const auto it = streams_.find({shape_id, kind});
  return it == streams_.end() ? kEmpty : it->second;
}

ScoreRecord& ScoreLog::append(ScoreRecord record) {
  record.seq = next_seq_[{record.shape_id, record.kind}]++;
  records_.push_back(std::move(record));
  return records_.back();
}

void ScoreLog::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ScoreFileError("cannot write score file " + path.string());
  write_score_records(out, records_);
}

SplitResponse RecordingSplit::split(const SplitRequest& request) {
  auto response = inner_->split(request);
  ScoreRecord r;
  r.kind = OperatorKind::kSplit;
  r.shape_id = request.shape_id;
  r.digest = request_digest(request.points.point_indices);
  r.labels = response.slots;
  log_->append(std::move(r));
  return response;
}

FixResponse RecordingFix::fix(const FixRequest& request) {
  auto response = inner_->fix(request);
  ScoreRecord r;
  r.kind = OperatorKind::kFix;
  r.shape_id = request.shape_id;
  r.digest = request_digest(request.points.point_indices);
  r.probs = response.inside_prob;
  log_->append(std::move(r));
  return response;
}

MergeResponse RecordingMerge::merge(const MergeRequest& request) {
  const auto response = inner_->merge(request);
  ScoreRecord r;
  r.kind = OperatorKind::kMerge;
  r.shape_id = request.shape_id;
  r.digest = request_digest(request.points.point_indices);
  r.score = response.probability;
  log_->append(std::move(r));
  return response;
}

ReplayCursor::ReplayCursor(const ScoreBook& book, std::string shape_id,
                           OperatorKind kind)
    : records_(book.stream(shape_id, kind)),
      shape_id_(std::move(shape_id)),
      kind_(kind) {}

const ScoreRecord& ReplayCursor::next(std::span<const std::size_t> request_points) {
  if (position_ >= records_.size()) {
    throw ScoreFileError("score file underrun: no " +
                         std::string(to_string(kind_)) + " record #" +
                         std::to_string(position_) + " for shape '" +
                         shape_id_ + "'");
  }
  const auto& record = records_[position_];
  const auto digest = request_digest(request_points);
  if (record.digest != digest) {
    throw ScoreFileError("stale score file: " + std::string(to_string(kind_)) +
                         " record seq " + std::to_string(record.seq) +
                         " for shape '" + shape_id_ + "' has digest " +
                         digest_hex(record.digest) + ", request has " +
                         digest_hex(digest));
  }
  ++position_;
  return record;
}

SplitResponse ReplaySplit::split(const SplitRequest& request) {
  return {cursor_.next(request.points.point_indices).labels};
}

FixResponse ReplayFix::fix(const FixRequest& request) {
  return {cursor_.next(request.points.point_indices).probs};
}

MergeResponse ReplayMerge::merge(const MergeRequest& request) {
  return {cursor_.next(request.points.point_indices).score};
}

}  // namespace shred
