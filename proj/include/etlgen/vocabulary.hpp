#pragma once

#include <optional>
#include <string_view>

#include "etlgen/common.hpp"

namespace etlgen {

enum class ArithOp { Add, Sub, Mul, Div };

/// `Day` is the day-level member of a time dimension: the calendar date
/// itself. The other parts extract a component of the date.
enum class DatePartKind { Day, MonthNum, MonthName, Year };

enum class AggregateFn { Sum, Avg, Min, Max, Count };

/// Formats understood by the format-conversion operator.
enum class Format { Number, String, Date, Upper, Lower };

std::string_view to_string(ArithOp op);
std::string_view to_string(DatePartKind part);
std::string_view to_string(AggregateFn fn);
std::string_view to_string(Format format);

std::optional<DatePartKind> parse_date_part(std::string_view text);
std::optional<AggregateFn> parse_aggregate_fn(std::string_view text);
std::optional<Format> parse_format(std::string_view text);

/// The closed conversion catalog: number->string, string->number,
/// date->string, string->date, string->upper, string->lower.
bool is_supported_conversion(Format from, Format to);
/// Input column type a conversion accepts.
DataType conversion_input_type(Format from);
/// Type produced by a conversion.
DataType conversion_output_type(Format to);

}  // namespace etlgen
