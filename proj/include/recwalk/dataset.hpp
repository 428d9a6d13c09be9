#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "recwalk/sparse.hpp"

namespace recwalk {

/// Bidirectional map between external string ids and dense indices.
class IdMap {
 public:
  Index add(const std::string& id);
  std::optional<Index> find(const std::string& id) const;
  const std::string& name(Index i) const { return names_.at(i); }
  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, Index> index_;
  std::vector<std::string> names_;
};

/// Deduplicated implicit-feedback log with dense user and item indices.
struct InteractionLog {
  std::vector<std::pair<Index, Index>> records;  // (user, item)
  IdMap users;
  IdMap items;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }

  /// Binary user x item matrix.
  SparseMatrix to_matrix() const;
};

/// Parses `user<sep>item[<sep>rating[<sep>timestamp]]` lines, where the
/// separator is a tab, `::` or a comma (detected from the first data line).
/// Blank lines and `#` comments are skipped, as is a header line whose third
/// field is not numeric. Users and items below the degree thresholds are
/// removed repeatedly until none remain. Indices follow first appearance.
InteractionLog parse_interactions(std::istream& in, std::size_t min_user_degree,
                                  std::size_t min_item_degree);
InteractionLog load_interactions(const std::filesystem::path& path, std::size_t min_user_degree,
                                 std::size_t min_item_degree);

inline constexpr std::size_t kNumNegatives = 999;

struct EvalSplit {
  SparseMatrix train;
  std::vector<std::optional<Index>> heldout;  // per user
  std::vector<std::vector<Index>> negatives;  // per user; empty without a held-out item
  std::uint64_t seed = 0;

  std::size_t num_users() const { return heldout.size(); }
  std::size_t num_evaluated() const;
};

/// Leave-one-out split of a binary interaction matrix.
///
/// Users are visited in index order. Each user with at least two
/// interactions holds out one item chosen uniformly at random among those
/// whose removal keeps the item column nonzero; users where no such item
/// exists keep everything. Negatives are drawn uniformly without replacement
/// from the items the user never interacted with. Randomness for user u comes
/// from a generator seeded with mix(seed, u), so results are bit-identical
/// across platforms.
EvalSplit leave_one_out(const SparseMatrix& r, std::uint64_t seed,
                        std::size_t num_negatives = kNumNegatives);
EvalSplit leave_one_out(const InteractionLog& log, std::uint64_t seed,
                        std::size_t num_negatives = kNumNegatives);

/// The same procedure applied to a training matrix.
EvalSplit make_validation(const SparseMatrix& train, std::uint64_t seed,
                          std::size_t num_negatives = kNumNegatives);

/// Seed derivation shared by the split and any other seeded stage.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Split file: `user<TAB>heldout<TAB>neg1,neg2,...` using external ids, one
/// line per user with a held-out item; `#` lines carry provenance.
void write_split(std::ostream& out, const EvalSplit& split, const InteractionLog& log,
                 const std::vector<std::string>& header = {});

/// Rebuilds a split from its file and the matrix it was drawn from: the
/// training matrix is `base` with the held-out entries removed.
EvalSplit read_split(std::istream& in, const SparseMatrix& base, const InteractionLog& log);

/// Drops every user and item outside the largest connected component of
/// the user-item graph, then reindexes.
InteractionLog restrict_to_giant_component(const InteractionLog& log);

}  // namespace recwalk
