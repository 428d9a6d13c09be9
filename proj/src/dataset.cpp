#include "recwalk/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "recwalk/error.hpp"
#include "recwalk/walk_model.hpp"
#include "rng.hpp"

namespace recwalk {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_number(std::string_view s) {
  double v;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string_view detect_separator(std::string_view line) {
  if (line.find('\t') != std::string_view::npos) return "\t";
  if (line.find("::") != std::string_view::npos) return "::";
  if (line.find(',') != std::string_view::npos) return ",";
  return {};
}

InteractionLog reindex(const std::vector<std::pair<std::string, std::string>>& pairs) {
  InteractionLog log;
  log.records.reserve(pairs.size());
  for (const auto& [u, i] : pairs) log.records.emplace_back(log.users.add(u), log.items.add(i));
  return log;
}

}  // namespace

Index IdMap::add(const std::string& id) {
  const auto [it, inserted] = index_.try_emplace(id, Index(names_.size()));
  if (inserted) names_.push_back(id);
  return it->second;
}

std::optional<Index> IdMap::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseMatrix InteractionLog::to_matrix() const {
  std::vector<Triplet> t;
  t.reserve(records.size());
  for (const auto& [u, i] : records) t.push_back({u, i, 1.0});
  return SparseMatrix(num_users(), num_items(), std::move(t), Duplicates::Binarize);
}

InteractionLog parse_interactions(std::istream& in, std::size_t min_user_degree,
                                  std::size_t min_item_degree) {
  IdMap users, items;
  std::vector<std::pair<Index, Index>> raw;
  std::string line;
  std::string_view sep;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (sep.empty()) {
      sep = detect_separator(text);
      if (sep.empty()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                               ": no tab, comma or '::' separator");
      }
    }
    const auto fields = split_fields(text, sep);
    if (first) {
      first = false;
      if (fields.size() >= 3 && !is_number(trim(fields[2]))) continue;
    }
    if (fields.size() < 2 || fields.size() > 4 || trim(fields[0]).empty() ||
        trim(fields[1]).empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                             ": expected user, item[, rating[, timestamp]]");
    }
    raw.emplace_back(users.add(std::string(trim(fields[0]))),
                     items.add(std::string(trim(fields[1]))));
  }

  // Deduplicate, keeping the first occurrence so file order is preserved.
  {
    std::vector<std::size_t> order(raw.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    std::vector<char> keep(raw.size(), 1);
    for (std::size_t k = 1; k < order.size(); ++k) {
      if (raw[order[k]] == raw[order[k - 1]]) keep[order[k]] = 0;
    }
    std::vector<std::pair<Index, Index>> unique;
    unique.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (keep[k]) unique.push_back(raw[k]);
    }
    raw = std::move(unique);
  }

  while (true) {
    std::vector<std::size_t> udeg(users.size(), 0), ideg(items.size(), 0);
    for (const auto& [u, i] : raw) {
      ++udeg[u];
      ++ideg[i];
    }
    const std::size_t before = raw.size();
    std::erase_if(raw, [&](const auto& rec) {
      return udeg[rec.first] < min_user_degree || ideg[rec.second] < min_item_degree;
    });
    if (raw.size() == before) break;
  }
  if (raw.empty()) {
    throw Error(ErrorCode::EmptyAfterFiltering, "no interactions survive degree thresholds (" +
                                                    std::to_string(min_user_degree) + ", " +
                                                    std::to_string(min_item_degree) + ")");
  }

  std::vector<std::pair<std::string, std::string>> named;
  named.reserve(raw.size());
  for (const auto& [u, i] : raw) named.emplace_back(users.name(u), items.name(i));
  return reindex(named);
}

InteractionLog load_interactions(const std::filesystem::path& path, std::size_t min_user_degree,
                                 std::size_t min_item_degree) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return parse_interactions(in, min_user_degree, min_item_degree);
}

std::size_t EvalSplit::num_evaluated() const {
  return std::size_t(std::count_if(heldout.begin(), heldout.end(),
                                   [](const auto& h) { return h.has_value(); }));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(detail::splitmix64(seed) ^ stream);
}

EvalSplit leave_one_out(const SparseMatrix& r, std::uint64_t seed, std::size_t num_negatives) {
  const std::size_t n_users = r.rows();
  const std::size_t n_items = r.cols();
  EvalSplit split;
  split.seed = seed;
  split.heldout.assign(n_users, std::nullopt);
  split.negatives.assign(n_users, {});

  std::vector<std::size_t> col_degree(n_items);
  for (std::size_t i = 0; i < n_items; ++i) col_degree[i] = r.col(i).size();

  std::vector<char> seen(n_items, 0);
  std::vector<Index> pool;
  std::vector<Index> eligible;
  for (std::size_t u = 0; u < n_users; ++u) {
    const auto row = r.row(u);
    if (row.size() < 2) continue;
    std::mt19937_64 rng(mix_seed(seed, u));

    eligible.clear();
    for (Index i : row.indices) {
      if (col_degree[i] > 1) eligible.push_back(i);
    }
    if (eligible.empty()) continue;
    const Index held = eligible[detail::uniform_below(rng, eligible.size())];
    --col_degree[held];
    split.heldout[u] = held;

    for (Index i : row.indices) seen[i] = 1;
    pool.clear();
    for (std::size_t i = 0; i < n_items; ++i) {
      if (!seen[i]) pool.push_back(Index(i));
    }
    for (Index i : row.indices) seen[i] = 0;

    const std::size_t take = std::min(num_negatives, pool.size());
    for (std::size_t t = 0; t < take; ++t) {
      const std::size_t j = t + detail::uniform_below(rng, pool.size() - t);
      std::swap(pool[t], pool[j]);
    }
    pool.resize(take);
    std::sort(pool.begin(), pool.end());
    split.negatives[u] = pool;
  }

  std::vector<Triplet> kept;
  kept.reserve(r.nnz());
  for (const auto& t : r.triplets()) {
    if (!(split.heldout[t.row] && *split.heldout[t.row] == t.col)) kept.push_back(t);
  }
  split.train = SparseMatrix(n_users, n_items, std::move(kept));
  return split;
}

EvalSplit leave_one_out(const InteractionLog& log, std::uint64_t seed,
                        std::size_t num_negatives) {
  return leave_one_out(log.to_matrix(), seed, num_negatives);
}

EvalSplit make_validation(const SparseMatrix& train, std::uint64_t seed,
                          std::size_t num_negatives) {
  return leave_one_out(train, seed, num_negatives);
}

void write_split(std::ostream& out, const EvalSplit& split, const InteractionLog& log,
                 const std::vector<std::string>& header) {
  for (const auto& h : header) out << "# " << h << '\n';
  for (std::size_t u = 0; u < split.num_users(); ++u) {
    if (!split.heldout[u]) continue;
    out << log.users.name(Index(u)) << '\t' << log.items.name(*split.heldout[u]) << '\t';
    const auto& negs = split.negatives[u];
    for (std::size_t k = 0; k < negs.size(); ++k) {
      if (k) out << ',';
      out << log.items.name(negs[k]);
    }
    out << '\n';
  }
}

EvalSplit read_split(std::istream& in, const SparseMatrix& base, const InteractionLog& log) {
  if (base.rows() != log.num_users() || base.cols() != log.num_items()) {
    throw Error(ErrorCode::IndexMapMismatch, "split base matrix does not match the dataset");
  }
  EvalSplit split;
  split.heldout.assign(base.rows(), std::nullopt);
  split.negatives.assign(base.rows(), {});

  auto lookup = [](const IdMap& map, std::string_view name, std::size_t line_no) {
    const auto idx = map.find(std::string(name));
    if (!idx) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unknown id '" +
                                             std::string(name) + "'");
    }
    return *idx;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto pos = text.find("seed=");
      if (pos != std::string_view::npos) {
        const auto digits = text.substr(pos + 5);
        std::from_chars(digits.data(), digits.data() + digits.size(), split.seed);
      }
      continue;
    }
    const auto fields = split_fields(text, "\t");
    if (fields.size() != 3) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                             ": expected user, held-out item and negatives");
    }
    const Index u = lookup(log.users, fields[0], line_no);
    const Index h = lookup(log.items, fields[1], line_no);
    if (base.at(u, h) == 0.0) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                             ": held-out item is not an interaction of the user");
    }
    split.heldout[u] = h;
    if (!fields[2].empty()) {
      for (const auto neg : split_fields(fields[2], ",")) {
        split.negatives[u].push_back(lookup(log.items, neg, line_no));
      }
    }
  }

  std::vector<Triplet> kept;
  kept.reserve(base.nnz());
  for (const auto& t : base.triplets()) {
    if (!(split.heldout[t.row] && *split.heldout[t.row] == t.col)) kept.push_back(t);
  }
  split.train = SparseMatrix(base.rows(), base.cols(), std::move(kept));
  return split;
}

InteractionLog restrict_to_giant_component(const InteractionLog& log) {
  const auto labels = check_connectivity(log.to_matrix());
  const std::size_t giant = labels.largest_component();
  std::vector<std::pair<std::string, std::string>> named;
  for (const auto& [u, i] : log.records) {
    if (labels.labels[u] == giant) named.emplace_back(log.users.name(u), log.items.name(i));
  }
  return reindex(named);
}

}  // namespace recwalk
