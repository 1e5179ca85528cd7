#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dasim {

using Money = double;
using TraderId = int;

enum class Side : std::uint8_t { Buy, Sell };

constexpr Side opposite(Side s) noexcept { return s == Side::Buy ? Side::Sell : Side::Buy; }
std::string_view to_string(Side s) noexcept;

struct MarketTime {
    int day = 0;
    int round = 0;
    std::uint64_t seq = 0;

    friend bool operator==(const MarketTime&, const MarketTime&) = default;
};

struct Shout {
    TraderId trader = -1;
    Side side = Side::Buy;
    Money price = 0.0;
    int quantity = 1;
    MarketTime time;

    friend bool operator==(const Shout&, const Shout&) = default;
};

struct Transaction {
    Shout bid;
    Shout ask;
    Money price = 0.0;
    MarketTime time;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

enum class ErrorCode {
    CrossedInput,
    ConfigInvalid,
    UnknownTrader,
    LengthMismatch,
    MissingProfile,
    ParseError,
    ValidationError,
    UnknownStrategy,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace dasim
