#include "ssmcheck/parser.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ssmcheck {

std::string formatDouble(double value) {
    if (std::isnan(value) || std::isinf(value)) {
        throwError(ErrorKind::Internal, "cannot format a non-finite number");
    }
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

enum class Tok {
    End,
    Ident,
    Number,
    LBrace, RBrace,
    LParen, RParen,
    LBracket, RBracket,
    Semi, Comma, Colon, Dot,
    Arrow,       // ->
    EqEq,        // ==
    Eq,          // =
    Bang, Amp, Pipe, Slash,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    SourcePos pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skipTrivia();
        Token t;
        t.pos = pos();
        if (i_ >= text_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = text_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i_;
            while (i_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
                ++i_;
            }
            t.kind = Tok::Ident;
            t.text = text_.substr(start, i_ - start);
            advanceColumns(i_ - start);
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_ + 1])))) {
            size_t start = i_;
            while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
            if (i_ < text_.size() && text_[i_] == '.' && i_ + 1 < text_.size() &&
                std::isdigit(static_cast<unsigned char>(text_[i_ + 1]))) {
                ++i_;
                while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
            }
            if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
                size_t save = i_;
                ++i_;
                if (i_ < text_.size() && (text_[i_] == '+' || text_[i_] == '-')) ++i_;
                if (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
                    while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
                } else {
                    i_ = save;  // 'e' begins an identifier (a unit like "e" never exists, but be strict)
                }
            }
            t.kind = Tok::Number;
            t.text = text_.substr(start, i_ - start);
            t.number = std::strtod(t.text.c_str(), nullptr);
            advanceColumns(i_ - start);
            return t;
        }
        auto two = [&](char a, char b) {
            return c == a && i_ + 1 < text_.size() && text_[i_ + 1] == b;
        };
        if (two('-', '>')) { t.kind = Tok::Arrow; consume(2); return t; }
        if (two('=', '=')) { t.kind = Tok::EqEq; consume(2); return t; }
        switch (c) {
            case '{': t.kind = Tok::LBrace; consume(1); return t;
            case '}': t.kind = Tok::RBrace; consume(1); return t;
            case '(': t.kind = Tok::LParen; consume(1); return t;
            case ')': t.kind = Tok::RParen; consume(1); return t;
            case '[': t.kind = Tok::LBracket; consume(1); return t;
            case ']': t.kind = Tok::RBracket; consume(1); return t;
            case ';': t.kind = Tok::Semi; consume(1); return t;
            case ',': t.kind = Tok::Comma; consume(1); return t;
            case ':': t.kind = Tok::Colon; consume(1); return t;
            case '.': t.kind = Tok::Dot; consume(1); return t;
            case '=': t.kind = Tok::Eq; consume(1); return t;
            case '!': t.kind = Tok::Bang; consume(1); return t;
            case '&': t.kind = Tok::Amp; consume(1); return t;
            case '|': t.kind = Tok::Pipe; consume(1); return t;
            case '/': t.kind = Tok::Slash; consume(1); return t;
        }
        throwError(ErrorKind::Parse, std::string("unexpected character '") + c + "'", pos());
    }

private:
    SourcePos pos() const { return {line_, col_}; }

    void consume(size_t n) {
        i_ += n;
        advanceColumns(n);
    }

    void advanceColumns(size_t n) { col_ += static_cast<uint32_t>(n); }

    void skipTrivia() {
        while (i_ < text_.size()) {
            char c = text_[i_];
            if (c == '\n') {
                ++i_;
                ++line_;
                col_ = 1;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++i_;
                ++col_;
            } else if (c == '/' && i_ + 1 < text_.size() && text_[i_ + 1] == '/') {
                while (i_ < text_.size() && text_[i_] != '\n') ++i_;
            } else if (c == '/' && i_ + 1 < text_.size() && text_[i_ + 1] == '*') {
                SourcePos open = pos();
                i_ += 2;
                col_ += 2;
                bool closed = false;
                while (i_ < text_.size()) {
                    if (text_[i_] == '*' && i_ + 1 < text_.size() && text_[i_ + 1] == '/') {
                        i_ += 2;
                        col_ += 2;
                        closed = true;
                        break;
                    }
                    if (text_[i_] == '\n') {
                        ++line_;
                        col_ = 1;
                        ++i_;
                    } else {
                        ++col_;
                        ++i_;
                    }
                }
                if (!closed) throwError(ErrorKind::Parse, "unterminated /* comment", open);
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    size_t i_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;
};

double unitToSeconds(const std::string& unit, SourcePos pos) {
    if (unit == "ms") return 1e-3;
    if (unit == "s") return 1.0;
    if (unit == "min") return 60.0;
    if (unit == "h") return 3600.0;
    throwError(ErrorKind::Parse, "unknown time unit '" + unit + "' (use ms, s, min, or h)", pos);
}

// Keywords that can never be identifiers. Words like "state", "in", "demand",
// "per_time", "repair", "persistent", and "transient" stay contextual so they
// remain usable as state and automaton names.
bool isHardKeyword(const std::string& s) {
    return s == "const" || s == "automaton" || s == "states" || s == "init" ||
           s == "pred" || s == "failure" || s == "hazard" || s == "true" || s == "false";
}

class Parser {
public:
    Parser(const std::string& text, const std::string& name) : lex_(text) {
        model_.name = name;
        cur_ = lex_.next();
    }

    SystemModel parse() {
        bool sawDt = false;
        while (cur_.kind != Tok::End) {
            if (isIdent("const")) {
                parseConst(sawDt);
            } else if (isIdent("pred")) {
                parsePred();
            } else if (isIdent("automaton")) {
                parseAutomaton();
            } else if (isIdent("failure")) {
                parseFailure();
            } else if (isIdent("hazard")) {
                parseHazard();
            } else {
                throwError(ErrorKind::Parse,
                           "expected a declaration (const, pred, automaton, failure, or hazard)",
                           cur_.pos);
            }
        }
        auto diags = model_.resolve();
        for (const auto& d : diags) {
            if (d.severity == Diagnostic::Severity::Error) {
                throwError(ErrorKind::Parse, d.message, d.pos);
            }
        }
        return std::move(model_);
    }

private:
    bool isIdent(const char* word) const {
        return cur_.kind == Tok::Ident && cur_.text == word;
    }

    void advance() { cur_ = lex_.next(); }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) {
            throwError(ErrorKind::Parse, std::string("expected ") + what, cur_.pos);
        }
        advance();
    }

    std::string expectIdent(const char* what) {
        if (cur_.kind != Tok::Ident) {
            throwError(ErrorKind::Parse, std::string("expected ") + what, cur_.pos);
        }
        if (isHardKeyword(cur_.text)) {
            throwError(ErrorKind::Parse,
                       "'" + cur_.text + "' is a keyword and cannot be used as a name", cur_.pos);
        }
        std::string s = cur_.text;
        advance();
        return s;
    }

    void expectKeyword(const char* word) {
        if (!isIdent(word)) {
            throwError(ErrorKind::Parse, std::string("expected '") + word + "'", cur_.pos);
        }
        advance();
    }

    double expectNumber(const char* what) {
        if (cur_.kind != Tok::Number) {
            throwError(ErrorKind::Parse, std::string("expected ") + what, cur_.pos);
        }
        double v = cur_.number;
        advance();
        return v;
    }

    // NUMBER UNIT, e.g. "10ms". The lexer splits this into a number token and
    // an identifier token.
    double parseDuration() {
        SourcePos pos = cur_.pos;
        double v = expectNumber("a duration");
        if (cur_.kind != Tok::Ident) {
            throwError(ErrorKind::Parse, "expected a time unit after the duration value", cur_.pos);
        }
        double factor = unitToSeconds(cur_.text, cur_.pos);
        advance();
        double seconds = v * factor;
        if (!(seconds > 0.0)) {
            throwError(ErrorKind::Parse, "duration must be positive", pos);
        }
        return seconds;
    }

    // NUMBER '/' UNIT, e.g. "1e-2/h", normalized to per-hour.
    double parseRate() {
        SourcePos pos = cur_.pos;
        double v = expectNumber("a rate");
        expect(Tok::Slash, "'/' in a rate");
        if (cur_.kind != Tok::Ident) {
            throwError(ErrorKind::Parse, "expected a time unit after '/'", cur_.pos);
        }
        double unitSeconds = unitToSeconds(cur_.text, cur_.pos);
        advance();
        if (v < 0.0) throwError(ErrorKind::Parse, "rate must be nonnegative", pos);
        return v * (3600.0 / unitSeconds);
    }

    void parseConst(bool& sawDt) {
        advance();  // const
        expectKeyword("dt");
        expect(Tok::Eq, "'='");
        if (sawDt) throwError(ErrorKind::Parse, "dt is declared twice", cur_.pos);
        model_.dtSeconds = parseDuration();
        sawDt = true;
        expect(Tok::Semi, "';'");
    }

    void parsePred() {
        SourcePos pos = cur_.pos;
        advance();  // pred
        NamedPredicate p;
        p.name = expectIdent("a predicate name");
        p.pos = pos;
        expect(Tok::Eq, "'='");
        p.expr = parseExpr();
        expect(Tok::Semi, "';'");
        model_.predicates.push_back(std::move(p));
    }

    void parseAutomaton() {
        SourcePos pos = cur_.pos;
        advance();  // automaton
        Automaton a;
        a.pos = pos;
        a.name = expectIdent("an automaton name");
        expect(Tok::LBrace, "'{'");
        expectKeyword("states");
        a.states.push_back(expectIdent("a state name"));
        while (cur_.kind == Tok::Comma) {
            advance();
            a.states.push_back(expectIdent("a state name"));
        }
        expect(Tok::Semi, "';'");
        expectKeyword("init");
        a.initName = expectIdent("the initial state name");
        expect(Tok::Semi, "';'");
        while (cur_.kind != Tok::RBrace) {
            a.groups.push_back(parseTransition());
        }
        advance();  // }
        model_.automata.push_back(std::move(a));
    }

    TransitionGroup parseTransition() {
        TransitionGroup g;
        g.pos = cur_.pos;
        g.fromName = expectIdent("a state name");
        expect(Tok::Arrow, "'->'");
        if (cur_.kind == Tok::LBrace) {
            advance();
            while (true) {
                Branch b;
                b.probability = expectNumber("a branch probability");
                expect(Tok::Colon, "':'");
                b.targetName = expectIdent("a target state name");
                g.branches.push_back(std::move(b));
                if (cur_.kind == Tok::Comma) {
                    advance();
                    continue;
                }
                break;
            }
            expect(Tok::RBrace, "'}'");
        } else {
            Branch b;
            b.targetName = expectIdent("a target state name");
            b.probability = 1.0;
            g.branches.push_back(std::move(b));
        }
        expect(Tok::LBracket, "'[' before the guard");
        g.guard = parseExpr();
        expect(Tok::RBracket, "']' after the guard");
        expect(Tok::Semi, "';'");
        return g;
    }

    void parseFailure() {
        SourcePos pos = cur_.pos;
        advance();  // failure
        FailureDecl d;
        d.pos = pos;
        d.name = expectIdent("a failure mode name");
        if (isIdent("persistent")) {
            advance();
            d.kind = FailureKind::Persistent;
        } else if (isIdent("transient")) {
            advance();
            d.kind = FailureKind::Transient;
        } else if (isIdent("per_time")) {
            advance();
            d.kind = FailureKind::PerTime;
            expect(Tok::LParen, "'('");
            d.ratePerHour = parseRate();
            expect(Tok::RParen, "')'");
            if (isIdent("transient")) {
                advance();
                d.disappearance = Disappearance::PerStep;
            } else if (isIdent("repair")) {
                advance();
                d.disappearance = Disappearance::Repair;
                expect(Tok::LParen, "'('");
                d.repairRatePerHour = parseRate();
                expect(Tok::RParen, "')'");
            }
        } else if (isIdent("per_demand")) {
            advance();
            d.kind = FailureKind::PerDemand;
            expect(Tok::LParen, "'('");
            d.demandProbability = expectNumber("a demand failure probability");
            expect(Tok::RParen, "')'");
            if (d.demandProbability < 0.0 || d.demandProbability > 1.0) {
                throwError(ErrorKind::Parse, "demand failure probability must be in [0,1]", pos);
            }
            expectKeyword("on");
            d.targetAutomaton = expectIdent("the demanded automaton's name");
            expectKeyword("demand");
            expect(Tok::LParen, "'('");
            d.demandGuard = parseExpr();
            expect(Tok::RParen, "')'");
        } else {
            throwError(ErrorKind::Parse,
                       "expected a failure pattern (persistent, transient, per_time, or per_demand)",
                       cur_.pos);
        }
        expect(Tok::Semi, "';'");
        model_.failures.push_back(std::move(d));
    }

    void parseHazard() {
        SourcePos pos = cur_.pos;
        advance();  // hazard
        if (model_.hazard) throwError(ErrorKind::Parse, "a model has exactly one hazard", pos);
        model_.hazardName = expectIdent("a hazard name");
        expect(Tok::Eq, "'='");
        model_.hazard = parseExpr();
        expect(Tok::Semi, "';'");
    }

    PredPtr parseExpr() { return parseOr(); }

    PredPtr parseOr() {
        PredPtr lhs = parseAnd();
        if (cur_.kind != Tok::Pipe) return lhs;
        std::vector<PredPtr> terms{lhs};
        while (cur_.kind == Tok::Pipe) {
            advance();
            terms.push_back(parseAnd());
        }
        return predOr(std::move(terms));
    }

    PredPtr parseAnd() {
        PredPtr lhs = parseUnary();
        if (cur_.kind != Tok::Amp) return lhs;
        std::vector<PredPtr> terms{lhs};
        while (cur_.kind == Tok::Amp) {
            advance();
            terms.push_back(parseUnary());
        }
        return predAnd(std::move(terms));
    }

    PredPtr parseUnary() {
        if (cur_.kind == Tok::Bang) {
            advance();
            return predNot(parseUnary());
        }
        return parsePrimary();
    }

    PredPtr parsePrimary() {
        SourcePos pos = cur_.pos;
        if (cur_.kind == Tok::LParen) {
            advance();
            PredPtr e = parseExpr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (isIdent("true")) {
            advance();
            return predTrue();
        }
        if (isIdent("false")) {
            advance();
            return predFalse();
        }
        std::string name = expectIdent("an expression");
        if (cur_.kind != Tok::Dot) {
            return predRef(std::move(name), pos);
        }
        advance();  // .
        if (cur_.kind != Tok::Ident) {
            throwError(ErrorKind::Parse, "expected 'state', 'in(...)', or a state name after '.'", cur_.pos);
        }
        std::string member = cur_.text;
        if (member == "state") {
            advance();
            expect(Tok::EqEq, "'=='");
            std::string state = expectIdent("a state name");
            return predStateEq(std::move(name), std::move(state), pos);
        }
        if (member == "in") {
            advance();
            if (cur_.kind == Tok::LParen) {
                advance();
                std::string state = expectIdent("a state name");
                expect(Tok::RParen, "')'");
                return predInState(std::move(name), std::move(state), pos);
            }
            // "X.in" without parentheses: a state literally named "in".
            return predStateEq(std::move(name), "in", pos);
        }
        if (isHardKeyword(member)) {
            throwError(ErrorKind::Parse,
                       "'" + member + "' is a keyword and cannot be used as a state name", cur_.pos);
        }
        advance();
        // "X.s" is shorthand for "X.state == s".
        return predStateEq(std::move(name), std::move(member), pos);
    }

    Lexer lex_;
    Token cur_;
    SystemModel model_;
};

} // namespace

SystemModel parseModel(const std::string& text, const std::string& name) {
    Parser p(text, name);
    return p.parse();
}

SystemModel loadModel(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throwError(ErrorKind::Usage, "cannot open model file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string stem = path;
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) {
        stem = stem.substr(slash + 1);
    }
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) {
        stem = stem.substr(0, dot);
    }
    return parseModel(buf.str(), stem);
}

double parseDurationSeconds(const std::string& text) {
    size_t i = 0;
    while (i < text.size() && text[i] != 'm' && text[i] != 's' && text[i] != 'h') ++i;
    std::string numPart = text.substr(0, i);
    std::string unit = text.substr(i);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(numPart.c_str(), &end);
    if (numPart.empty() || end != numPart.c_str() + numPart.size() || errno == ERANGE) {
        throwError(ErrorKind::Parse, "malformed duration '" + text + "'");
    }
    double seconds = v * unitToSeconds(unit, {});
    if (!(seconds > 0.0)) throwError(ErrorKind::Parse, "duration must be positive");
    return seconds;
}

double parseRatePerHour(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) {
        throwError(ErrorKind::Parse, "malformed rate '" + text + "' (expected NUMBER/unit)");
    }
    std::string numPart = text.substr(0, slash);
    std::string unit = text.substr(slash + 1);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(numPart.c_str(), &end);
    if (numPart.empty() || end != numPart.c_str() + numPart.size() || errno == ERANGE) {
        throwError(ErrorKind::Parse, "malformed rate '" + text + "'");
    }
    if (v < 0.0) throwError(ErrorKind::Parse, "rate must be nonnegative");
    return v * (3600.0 / unitToSeconds(unit, {}));
}

std::string printModel(const SystemModel& model) {
    std::string out;
    out += "const dt = " + formatDouble(model.dtSeconds) + "s;\n";

    for (const auto& p : model.predicates) {
        out += "pred " + p.name + " = " + printPredicate(*p.expr) + ";\n";
    }
    for (const auto& a : model.automata) {
        out += "automaton " + a.name + " {\n  states ";
        for (size_t i = 0; i < a.states.size(); ++i) {
            if (i) out += ", ";
            out += a.states[i];
        }
        out += ";\n  init " + a.initName + ";\n";
        for (const auto& g : a.groups) {
            out += "  " + g.fromName + " -> ";
            if (g.branches.size() == 1 && g.branches[0].probability == 1.0) {
                out += g.branches[0].targetName;
            } else {
                out += "{";
                for (size_t i = 0; i < g.branches.size(); ++i) {
                    if (i) out += ", ";
                    out += formatDouble(g.branches[i].probability) + ": " + g.branches[i].targetName;
                }
                out += "}";
            }
            out += " [" + printPredicate(*g.guard) + "];\n";
        }
        out += "}\n";
    }
    for (const auto& d : model.failures) {
        if (d.materialized) continue;  // already part of the automata above
        out += "failure " + d.name + " ";
        switch (d.kind) {
            case FailureKind::Persistent:
                out += "persistent";
                break;
            case FailureKind::Transient:
                out += "transient";
                break;
            case FailureKind::PerTime:
                out += "per_time(" + formatDouble(d.ratePerHour) + "/h)";
                if (d.disappearance == Disappearance::PerStep) out += " transient";
                if (d.disappearance == Disappearance::Repair) {
                    out += " repair(" + formatDouble(d.repairRatePerHour) + "/h)";
                }
                break;
            case FailureKind::PerDemand:
                out += "per_demand(" + formatDouble(d.demandProbability) + ") on " +
                       d.targetAutomaton + " demand (" + printPredicate(*d.demandGuard) + ")";
                break;
        }
        out += ";\n";
    }
    if (model.hazard) {
        out += "hazard " + (model.hazardName.empty() ? std::string("H") : model.hazardName) +
               " = " + printPredicate(**model.hazard) + ";\n";
    }
    return out;
}

} // namespace ssmcheck
