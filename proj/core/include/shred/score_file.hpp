#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shred/operators.hpp"

namespace shred {

enum class OperatorKind { kSplit, kFix, kMerge };

std::string_view to_string(OperatorKind kind);
OperatorKind parse_operator_kind(std::string_view text);

/// One operator response in a score file. Exactly one payload field is used,
/// selected by `kind`. Probabilities are 32-bit floats.
struct ScoreRecord {
  OperatorKind kind = OperatorKind::kMerge;
  std::string shape_id;
  std::uint64_t seq = 0;
  std::uint64_t digest = 0;
  std::vector<std::uint8_t> labels;  // split
  std::vector<float> probs;          // fix
  float score = 0.0f;                // merge
};

std::string digest_hex(std::uint64_t digest);
std::uint64_t parse_digest_hex(std::string_view hex);

/// JSON-lines encoding, e.g.
/// {"kind":"merge","shape":"chair_01","seq":3,"digest":"00ab...","score":0.87}
std::string to_json_line(const ScoreRecord& record);
ScoreRecord parse_score_line(std::string_view line);

std::vector<ScoreRecord> read_score_records(std::istream& in);
std::vector<ScoreRecord> read_score_file(const std::filesystem::path& path);
void write_score_records(std::ostream& out, const std::vector<ScoreRecord>& records);

/// Records grouped by (shape, kind), each stream ordered by seq. Loading
/// rejects streams whose sequence numbers repeat.
class ScoreBook {
 public:
  ScoreBook() = default;
  explicit ScoreBook(std::vector<ScoreRecord> records);
  static ScoreBook load(const std::filesystem::path& path);

  /// Empty when the file holds nothing for this stream.
  const std::vector<ScoreRecord>& stream(const std::string& shape_id,
                                         OperatorKind kind) const;

 private:
  std::map<std::pair<std::string, OperatorKind>, std::vector<ScoreRecord>> streams_;
};

/// Collects records in request order. Sequence numbers count from 0 per
/// (shape, kind).
class ScoreLog {
 public:
  ScoreRecord& append(ScoreRecord record);
  const std::vector<ScoreRecord>& records() const { return records_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<ScoreRecord> records_;
  std::map<std::pair<std::string, OperatorKind>, std::uint64_t> next_seq_;
};

/// Wrappers that forward to an inner operator and log every response. The
/// returned value is exactly what a replay of the log would return.
class RecordingSplit final : public SplitOperator {
 public:
  RecordingSplit(std::shared_ptr<SplitOperator> inner, std::shared_ptr<ScoreLog> log)
      : inner_(std::move(inner)), log_(std::move(log)) {}
  SplitResponse split(const SplitRequest& request) override;

 private:
  std::shared_ptr<SplitOperator> inner_;
  std::shared_ptr<ScoreLog> log_;
};

class RecordingFix final : public FixOperator {
 public:
  RecordingFix(std::shared_ptr<FixOperator> inner, std::shared_ptr<ScoreLog> log)
      : inner_(std::move(inner)), log_(std::move(log)) {}
  FixResponse fix(const FixRequest& request) override;

 private:
  std::shared_ptr<FixOperator> inner_;
  std::shared_ptr<ScoreLog> log_;
};

class RecordingMerge final : public MergeOperator {
 public:
  RecordingMerge(std::shared_ptr<MergeOperator> inner, std::shared_ptr<ScoreLog> log)
      : inner_(std::move(inner)), log_(std::move(log)) {}
  MergeResponse merge(const MergeRequest& request) override;

 private:
  std::shared_ptr<MergeOperator> inner_;
  std::shared_ptr<ScoreLog> log_;
};

/// Answers the n-th request of a (shape, kind) stream with the n-th record
/// after checking its digest. Throws ScoreFileError "stale score file" on a
/// digest mismatch and "score file underrun" when records run out.
class ReplayCursor {
 public:
  ReplayCursor(const ScoreBook& book, std::string shape_id, OperatorKind kind);
  const ScoreRecord& next(std::span<const std::size_t> request_points);
  std::size_t consumed() const { return position_; }

 private:
  std::vector<ScoreRecord> records_;
  std::string shape_id_;
  OperatorKind kind_;
  std::size_t position_ = 0;
};

class ReplaySplit final : public SplitOperator {
 public:
  ReplaySplit(const ScoreBook& book, std::string shape_id)
      : cursor_(book, std::move(shape_id), OperatorKind::kSplit) {}
  SplitResponse split(const SplitRequest& request) override;

 private:
  ReplayCursor cursor_;
};

class ReplayFix final : public FixOperator {
 public:
  ReplayFix(const ScoreBook& book, std::string shape_id)
      : cursor_(book, std::move(shape_id), OperatorKind::kFix) {}
  FixResponse fix(const FixRequest& request) override;

 private:
  ReplayCursor cursor_;
};

class ReplayMerge final : public MergeOperator {
 public:
  ReplayMerge(const ScoreBook& book, std::string shape_id)
      : cursor_(book, std::move(shape_id), OperatorKind::kMerge) {}
  MergeResponse merge(const MergeRequest& request) override;

 private:
  ReplayCursor cursor_;
};

}  // namespace shred
