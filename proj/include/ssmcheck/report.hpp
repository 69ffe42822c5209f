#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ssmcheck {

// Deterministic JSON emitter: keys appear exactly in insertion order, floats
// print via %.17g, strings are escaped per RFC 8259. Identical inputs yield
// byte-identical text.
class JsonWriter {
public:
    JsonWriter& beginObject();
    JsonWriter& endObject();
    JsonWriter& beginArray();
    JsonWriter& endArray();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v);
    JsonWriter& value(double v);
    JsonWriter& value(long long v);
    JsonWriter& value(uint64_t v);
    JsonWriter& value(int v);
    JsonWriter& value(bool v);
    JsonWriter& null();

    std::string str() const { return out_; }

private:
    void separator();
    std::string out_;
    std::vector<bool> firstInScope_;
    bool pendingKey_ = false;
};

std::string jsonEscape(const std::string& s);

// %.17g, with "inf"/"nan" never appearing: non-finite values are a bug in the
// caller and throw.
std::string formatReportDouble(double v);

} // namespace ssmcheck
