#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace floodsense {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Malformed flow record. `line` is 1-based, `field` is the 1-based CSV column.
class ParseError : public Error {
public:
	ParseError(std::size_t line, int field, const std::string &what)
	    : Error("line " + std::to_string(line) + ", field " + std::to_string(field) + ": " + what), line_(line),
	      field_(field) {
	}

	std::size_t line() const noexcept {
		return line_;
	}
	int field() const noexcept {
		return field_;
	}

private:
	std::size_t line_;
	int field_;
};

class ConfigError : public Error {
public:
	using Error::Error;
};

class TrainingError : public Error {
public:
	using Error::Error;
};

/// File carries an unknown magic or format tag.
class VersionError : public Error {
public:
	using Error::Error;
};

/// File is truncated or structurally damaged.
class CorruptFileError : public Error {
public:
	using Error::Error;
};

/// Input series cannot support the requested statistic.
class DataError : public Error {
public:
	using Error::Error;
};

class IoError : public Error {
public:
	using Error::Error;
};

} // namespace floodsense
