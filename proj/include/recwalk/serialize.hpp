#pragma once

#include <iosfwd>
#include <string>

#include "recwalk/item_model.hpp"
#include "recwalk/walk_model.hpp"

namespace recwalk {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Text form: `W <I> <nnz> <C> <l1> <l2>` then one `row col weight` line per
/// entry in row-major order. Lines starting with `#` are comments.
void write_item_model_text(std::ostream& out, const ItemModel& model);
ItemModel read_item_model_text(std::istream& in);

/// Little-endian binary form of the same content.
void write_item_model_binary(std::ostream& out, const ItemModel& model);
ItemModel read_item_model_binary(std::istream& in);

/// Binary walk model: node layout (U, I, alpha) followed by P, H and M_I.
void write_walk_model(std::ostream& out, const RecWalkModel& model);
RecWalkModel read_walk_model(std::istream& in);

}  // namespace recwalk
