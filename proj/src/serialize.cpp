#include "recwalk/serialize.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "recwalk/error.hpp"

namespace recwalk {

static_assert(std::endian::native == std::endian::little,
              "binary model files are written in native little-endian order");

namespace {

constexpr std::array<char, 4> kItemMagic{'R', 'W', 'I', 'M'};
constexpr std::array<char, 4> kWalkMagic{'R', 'W', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw Error(ErrorCode::Io, "truncated binary model");
  }
  return v;
}

void put_magic(std::ostream& out, const std::array<char, 4>& magic) {
  out.write(magic.data(), 4);
  put<std::uint32_t>(out, kVersion);
}

void expect_magic(std::istream& in, const std::array<char, 4>& magic) {
  std::array<char, 4> got{};
  if (!in.read(got.data(), 4) || got != magic) throw Error(ErrorCode::Io, "bad file signature");
  if (get<std::uint32_t>(in) != kVersion) throw Error(ErrorCode::Io, "unsupported file version");
}

void put_matrix(std::ostream& out, const SparseMatrix& m) {
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  put<std::uint64_t>(out, m.nnz());
  for (const auto& t : m.triplets()) {
    put<std::uint32_t>(out, t.row);
    put<std::uint32_t>(out, t.col);
    put<double>(out, t.value);
  }
}

SparseMatrix get_matrix(std::istream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  const auto nnz = get<std::uint64_t>(in);
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    const auto r = get<std::uint32_t>(in);
    const auto c = get<std::uint32_t>(in);
    const auto v = get<double>(in);
    t.push_back({r, c, v});
  }
  return SparseMatrix(rows, cols, std::move(t));
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_item_model_text(std::ostream& out, const ItemModel& model) {
  out << "W " << model.num_items() << ' ' << model.w.nnz() << ' ' << model.neighbors << ' '
      << format_double(model.l1) << ' ' << format_double(model.l2) << '\n';
  for (const auto& t : model.w.triplets()) {
    out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
  }
}

ItemModel read_item_model_text(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw Error(ErrorCode::ParseError, "missing item model header");
  std::istringstream header(line);
  std::string tag, l1, l2;
  std::size_t items = 0, nnz = 0;
  ItemModel model;
  if (!(header >> tag >> items >> nnz >> model.neighbors >> l1 >> l2) || tag != "W") {
    throw Error(ErrorCode::ParseError, "bad item model header '" + line + "'");
  }
  model.l1 = parse_double(l1);
  model.l2 = parse_double(l2);
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!next_line()) throw Error(ErrorCode::ParseError, "item model ends early");
    std::istringstream row(line);
    std::uint32_t r = 0, c = 0;
    std::string v;
    if (!(row >> r >> c >> v)) throw Error(ErrorCode::ParseError, "bad entry '" + line + "'");
    t.push_back({r, c, parse_double(v)});
  }
  model.w = SparseMatrix(items, items, std::move(t));
  return model;
}

void write_item_model_binary(std::ostream& out, const ItemModel& model) {
  put_magic(out, kItemMagic);
  put<std::uint64_t>(out, model.neighbors);
  put<double>(out, model.l1);
  put<double>(out, model.l2);
  put_matrix(out, model.w);
}

ItemModel read_item_model_binary(std::istream& in) {
  expect_magic(in, kItemMagic);
  ItemModel model;
  model.neighbors = get<std::uint64_t>(in);
  model.l1 = get<double>(in);
  model.l2 = get<double>(in);
  model.w = get_matrix(in);
  if (model.w.rows() != model.w.cols()) throw Error(ErrorCode::Io, "item model is not square");
  return model;
}

void write_walk_model(std::ostream& out, const RecWalkModel& model) {
  put_magic(out, kWalkMagic);
  put<std::uint64_t>(out, model.num_users);
  put<std::uint64_t>(out, model.num_items);
  put<double>(out, model.alpha);
  put_matrix(out, model.p.matrix());
  put_matrix(out, model.h.matrix());
  put_matrix(out, model.m_items.matrix());
}

RecWalkModel read_walk_model(std::istream& in) {
  expect_magic(in, kWalkMagic);
  RecWalkModel model;
  model.num_users = get<std::uint64_t>(in);
  model.num_items = get<std::uint64_t>(in);
  model.alpha = get<double>(in);
  model.p = StochasticMatrix(get_matrix(in));
  model.h = StochasticMatrix(get_matrix(in));
  model.m_items = StochasticMatrix(get_matrix(in));
  if (model.p.order() != model.order() || model.h.order() != model.order() ||
      model.m_items.order() != model.num_items) {
    throw Error(ErrorCode::Io, "walk model blocks disagree with the node layout");
  }
  return model;
}

}  // namespace recwalk
