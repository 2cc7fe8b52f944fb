#include "oblivio/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace oblivio {

namespace {

enum class Tok : uint8_t {
    Ident,
    IntLit,
    StrLit,
    KwSkip,
    KwSend,
    KwOutput,
    KwInput,
    KwIf,
    KwThen,
    KwElse,
    KwOblif,
    KwWhile,
    KwDo,
    KwVar,
    KwLocal,
    KwChannel,
    KwLattice,
    KwInt,
    KwString,
    KwStop,
    KwPop,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Colon,
    At,
    Dollar,
    Slash,
    Assign,    // =  (also the equality operator; disambiguated by context)
    OblivAsn,  // ?=
    Ne,        // !=
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Plus,
    Minus,
    Star,
    Caret,
    End,
};

struct Token {
    Tok kind;
    std::string text;   // identifier / string payload
    int64_t int_value = 0;
    SourcePos pos;
};

const std::map<std::string, Tok, std::less<>> kKeywords = {
    {"skip", Tok::KwSkip},     {"send", Tok::KwSend},   {"output", Tok::KwOutput},
    {"input", Tok::KwInput},   {"if", Tok::KwIf},       {"then", Tok::KwThen},
    {"else", Tok::KwElse},     {"oblif", Tok::KwOblif}, {"while", Tok::KwWhile},
    {"do", Tok::KwDo},         {"var", Tok::KwVar},     {"local", Tok::KwLocal},
    {"channel", Tok::KwChannel}, {"lattice", Tok::KwLattice}, {"int", Tok::KwInt},
    {"string", Tok::KwString}, {"stop", Tok::KwStop},   {"pop", Tok::KwPop},
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End)
                break;
        }
        return out;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(pos(), msg); }

    SourcePos pos() const { return {line_, col_}; }

    bool eof() const { return i_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_trivia() {
        for (;;) {
            while (!eof() && std::isspace(static_cast<unsigned char>(peek())))
                advance();
            if (peek() == '/' && peek(1) == '/') {
                while (!eof() && peek() != '\n')
                    advance();
                continue;
            }
            if (peek() == '/' && peek(1) == '*') {
                SourcePos start = pos();
                advance();
                advance();
                while (!(peek() == '*' && peek(1) == '/')) {
                    if (eof())
                        throw ParseError(start, "unterminated block comment");
                    advance();
                }
                advance();
                advance();
                continue;
            }
            return;
        }
    }

    Token next() {
        SourcePos p = pos();
        if (eof())
            return {Tok::End, "", 0, p};
        char c = peek();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                word += advance();
            auto kw = kKeywords.find(word);
            if (kw != kKeywords.end())
                return {kw->second, word, 0, p};
            return {Tok::Ident, word, 0, p};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            uint64_t value = 0;
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
                uint64_t digit = static_cast<uint64_t>(advance() - '0');
                if (value > (UINT64_MAX - digit) / 10)
                    throw ParseError(p, "integer literal out of range");
                value = value * 10 + digit;
            }
            if (value > static_cast<uint64_t>(INT64_MAX))
                throw ParseError(p, "integer literal out of range");
            return {Tok::IntLit, "", static_cast<int64_t>(value), p};
        }
        if (c == '"') {
            advance();
            std::string text;
            for (;;) {
                if (eof())
                    throw ParseError(p, "unterminated string literal");
                char ch = advance();
                if (ch == '"')
                    break;
                if (ch == '\\') {
                    if (eof())
                        throw ParseError(p, "unterminated string literal");
                    char esc = advance();
                    switch (esc) {
                    case '"': text += '"'; break;
                    case '\\': text += '\\'; break;
                    case 'n': text += '\n'; break;
                    case 't': text += '\t'; break;
                    default: throw ParseError(pos(), std::string("unknown escape \\") + esc);
                    }
                    continue;
                }
                text += ch;
            }
            return {Tok::StrLit, text, 0, p};
        }
        advance();
        switch (c) {
        case '(': return {Tok::LParen, "", 0, p};
        case ')': return {Tok::RParen, "", 0, p};
        case '{': return {Tok::LBrace, "", 0, p};
        case '}': return {Tok::RBrace, "", 0, p};
        case ';': return {Tok::Semi, "", 0, p};
        case ',': return {Tok::Comma, "", 0, p};
        case ':': return {Tok::Colon, "", 0, p};
        case '@': return {Tok::At, "", 0, p};
        case '$': return {Tok::Dollar, "", 0, p};
        case '/': return {Tok::Slash, "", 0, p};
        case '+': return {Tok::Plus, "", 0, p};
        case '-': return {Tok::Minus, "", 0, p};
        case '*': return {Tok::Star, "", 0, p};
        case '^': return {Tok::Caret, "", 0, p};
        case '=': return {Tok::Assign, "", 0, p};
        case '!':
            if (peek() == '=') {
                advance();
                return {Tok::Ne, "", 0, p};
            }
            fail("expected '=' after '!'");
        case '?':
            if (peek() == '=') {
                advance();
                return {Tok::OblivAsn, "", 0, p};
            }
            fail("expected '=' after '?'");
        case '<':
            if (peek() == '=') {
                advance();
                return {Tok::Le, "", 0, p};
            }
            return {Tok::Lt, "", 0, p};
        case '>':
            if (peek() == '=') {
                advance();
                return {Tok::Ge, "", 0, p};
            }
            return {Tok::Gt, "", 0, p};
        case '&':
            if (peek() == '&') {
                advance();
                return {Tok::AndAnd, "", 0, p};
            }
            fail("expected '&&'");
        case '|':
            if (peek() == '|') {
                advance();
                return {Tok::OrOr, "", 0, p};
            }
            fail("expected '||'");
        default:
            fail(std::string("unexpected character '") + c + "'");
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
  public:
    Parser(std::vector<Token> tokens, const Lattice* lattice_override)
        : toks_(std::move(tokens)), override_(lattice_override) {}

    Program run() {
        Program p;
        p.node_id = expect_ident("node id");
        for (;;) {
            if (at(Tok::KwLattice))
                parse_lattice_decl(p);
            else if (at(Tok::KwLocal))
                parse_local_decl(p);
            else if (at(Tok::KwVar))
                parse_var_decl(p);
            else
                break;
        }
        while (!at(Tok::End))
            parse_handler(p);
        validate(p);
        return p;
    }

  private:
    const Token& cur() const { return toks_[i_]; }
    bool at(Tok k) const { return cur().kind == k; }
    Token take() { return toks_[i_++]; }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(cur().pos, msg); }

    Token expect(Tok k, const std::string& what) {
        if (!at(k))
            fail("expected " + what);
        return take();
    }

    std::string expect_ident(const std::string& what) {
        if (!at(Tok::Ident))
            fail("expected " + what);
        return take().text;
    }

    void parse_lattice_decl(Program& p) {
        take(); // lattice
        for (;;) {
            std::string lo = expect_ident("level name");
            expect(Tok::Lt, "'<' in lattice order pair");
            std::string hi = expect_ident("level name");
            p.lattice_pairs.emplace_back(std::move(lo), std::move(hi));
            if (at(Tok::Comma)) {
                take();
                continue;
            }
            break;
        }
        expect(Tok::Semi, "';' after lattice declaration");
    }

    std::pair<Sort, std::string> parse_type() {
        Sort sort;
        if (at(Tok::KwInt))
            sort = Sort::Int;
        else if (at(Tok::KwString))
            sort = Sort::String;
        else
            fail("expected base type 'int' or 'string'");
        take();
        expect(Tok::At, "'@' before security label");
        std::string level = expect_ident("security label");
        return {sort, level};
    }

    void parse_local_decl(Program& p) {
        SourcePos pos = cur().pos;
        take(); // local
        expect(Tok::KwChannel, "'channel' after 'local'");
        std::string name = expect_ident("local channel name");
        expect(Tok::Colon, "':' in local channel declaration");
        auto [sort, level] = parse_type();
        expect(Tok::Semi, "';' after local channel declaration");
        p.locals.push_back({std::move(name), sort, std::move(level), pos});
    }

    void parse_var_decl(Program& p) {
        SourcePos pos = cur().pos;
        take(); // var
        std::string name = expect_ident("variable name");
        expect(Tok::Colon, "':' in variable declaration");
        auto [sort, level] = parse_type();
        std::optional<SizedValue> init;
        if (at(Tok::Assign)) {
            take();
            if (at(Tok::IntLit)) {
                if (sort != Sort::Int)
                    fail("string variable initialized with an int literal");
                init = SizedValue::of_int(take().int_value);
            } else if (at(Tok::StrLit)) {
                if (sort != Sort::String)
                    fail("int variable initialized with a string literal");
                init = SizedValue::of_string(take().text);
            } else {
                fail("expected literal initializer");
            }
        }
        expect(Tok::Semi, "';' after variable declaration");
        p.globals.push_back({std::move(name), sort, std::move(level), std::move(init), pos});
    }

    void parse_handler(Program& p) {
        Handler h;
        h.pos = cur().pos;
        h.name = expect_ident("handler name");
        expect(Tok::At, "'@' before handler mode label");
        h.mode_level = expect_ident("handler mode label");
        if (at(Tok::Dollar)) {
            take();
            h.potential = static_cast<uint64_t>(expect(Tok::IntLit, "potential").int_value);
        }
        expect(Tok::LParen, "'(' before handler parameter");
        h.param_name = expect_ident("parameter name");
        expect(Tok::Colon, "':' in parameter declaration");
        auto [sort, level] = parse_type();
        h.param_sort = sort;
        h.param_level = level;
        expect(Tok::RParen, "')' after handler parameter");
        h.body = parse_block();
        p.handlers.push_back(std::move(h));
    }

    CommandPtr parse_block() {
        SourcePos pos = cur().pos;
        expect(Tok::LBrace, "'{'");
        std::vector<CommandPtr> stmts;
        while (!at(Tok::RBrace))
            stmts.push_back(parse_stmt());
        take(); // }
        if (stmts.empty())
            return Command::skip(pos);
        CommandPtr out = stmts.back();
        for (auto it = stmts.rbegin() + 1; it != stmts.rend(); ++it)
            out = Command::seq(*it, std::move(out), (*it)->pos);
        return out;
    }

    CommandPtr parse_stmt() {
        SourcePos pos = cur().pos;
        switch (cur().kind) {
        case Tok::LBrace:
            return parse_block();
        case Tok::KwSkip: {
            take();
            expect(Tok::Semi, "';' after skip");
            return Command::skip(pos);
        }
        case Tok::KwSend: {
            take();
            expect(Tok::LParen, "'(' after send");
            std::string node = expect_ident("target node");
            expect(Tok::Slash, "'/' in send channel NODE/NAME");
            std::string ch = expect_ident("target channel");
            expect(Tok::Comma, "',' after send channel");
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')' after send");
            expect(Tok::Semi, "';' after send");
            return Command::send(node + "/" + ch, std::move(e), pos);
        }
        case Tok::KwOutput: {
            take();
            expect(Tok::LParen, "'(' after output");
            std::string ch = expect_ident("local channel");
            expect(Tok::Comma, "',' after output channel");
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')' after output");
            expect(Tok::Semi, "';' after output");
            return Command::output(std::move(ch), std::move(e), pos);
        }
        case Tok::KwIf:
        case Tok::KwOblif: {
            bool oblivious = cur().kind == Tok::KwOblif;
            take();
            ExprPtr guard = parse_expr();
            expect(Tok::KwThen, "'then'");
            CommandPtr then_branch = parse_stmt();
            expect(Tok::KwElse, "'else'");
            CommandPtr else_branch = parse_stmt();
            return oblivious
                       ? Command::obliv_if(std::move(guard), std::move(then_branch),
                                           std::move(else_branch), pos)
                       : Command::if_(std::move(guard), std::move(then_branch),
                                      std::move(else_branch), pos);
        }
        case Tok::KwWhile: {
            take();
            ExprPtr guard = parse_expr();
            expect(Tok::KwDo, "'do'");
            CommandPtr body = parse_stmt();
            return Command::while_(std::move(guard), std::move(body), pos);
        }
        case Tok::Ident: {
            std::string x = take().text;
            if (at(Tok::Assign)) {
                take();
                ExprPtr e = parse_expr();
                expect(Tok::Semi, "';' after assignment");
                return Command::assign(std::move(x), std::move(e), pos);
            }
            if (at(Tok::OblivAsn)) {
                take();
                if (at(Tok::KwInput)) {
                    take();
                    expect(Tok::LParen, "'(' after input");
                    std::string ch = expect_ident("local channel");
                    expect(Tok::Comma, "',' after input channel");
                    ExprPtr e = parse_expr();
                    expect(Tok::RParen, "')' after input");
                    expect(Tok::Semi, "';' after input");
                    return Command::local_input(std::move(x), std::move(ch), std::move(e), pos);
                }
                ExprPtr e = parse_expr();
                expect(Tok::Semi, "';' after oblivious assignment");
                return Command::obliv_assign(std::move(x), std::move(e), pos);
            }
            fail("expected '=' or '?=' after identifier");
        }
        default:
            fail("expected a statement");
        }
    }

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr e = parse_and();
        while (at(Tok::OrOr)) {
            SourcePos p = take().pos;
            e = Expr::binary(BinOp::Or, std::move(e), parse_and(), p);
        }
        return e;
    }

    ExprPtr parse_and() {
        ExprPtr e = parse_cmp();
        while (at(Tok::AndAnd)) {
            SourcePos p = take().pos;
            e = Expr::binary(BinOp::And, std::move(e), parse_cmp(), p);
        }
        return e;
    }

    ExprPtr parse_cmp() {
        ExprPtr e = parse_add();
        for (;;) {
            BinOp op;
            switch (cur().kind) {
            case Tok::Assign: op = BinOp::Eq; break;
            case Tok::Ne: op = BinOp::Ne; break;
            case Tok::Lt: op = BinOp::Lt; break;
            case Tok::Le: op = BinOp::Le; break;
            case Tok::Gt: op = BinOp::Gt; break;
            case Tok::Ge: op = BinOp::Ge; break;
            default: return e;
            }
            SourcePos p = take().pos;
            e = Expr::binary(op, std::move(e), parse_add(), p);
        }
    }

    ExprPtr parse_add() {
        ExprPtr e = parse_mul();
        for (;;) {
            BinOp op;
            switch (cur().kind) {
            case Tok::Plus: op = BinOp::Add; break;
            case Tok::Minus: op = BinOp::Sub; break;
            case Tok::Caret: op = BinOp::Concat; break;
            default: return e;
            }
            SourcePos p = take().pos;
            e = Expr::binary(op, std::move(e), parse_mul(), p);
        }
    }

    ExprPtr parse_mul() {
        ExprPtr e = parse_atom();
        while (at(Tok::Star)) {
            SourcePos p = take().pos;
            e = Expr::binary(BinOp::Mul, std::move(e), parse_atom(), p);
        }
        return e;
    }

    ExprPtr parse_atom() {
        SourcePos pos = cur().pos;
        switch (cur().kind) {
        case Tok::IntLit:
            return Expr::int_lit(take().int_value, pos);
        case Tok::StrLit:
            return Expr::str_lit(take().text, pos);
        case Tok::Ident:
            return Expr::var(take().text, pos);
        case Tok::LParen: {
            take();
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        default:
            fail("expected an expression");
        }
    }

    void validate(const Program& p) {
        std::set<std::string> seen;
        for (const auto& h : p.handlers)
            if (!seen.insert(h.name).second)
                throw ParseError(h.pos, "duplicate handler name '" + h.name + "'");
        seen.clear();
        for (const auto& v : p.globals)
            if (!seen.insert(v.name).second)
                throw ParseError(v.pos, "duplicate variable name '" + v.name + "'");
        seen.clear();
        for (const auto& l : p.locals)
            if (!seen.insert(l.name).second)
                throw ParseError(l.pos, "duplicate local channel name '" + l.name + "'");

        Lattice own = program_lattice(p);
        const Lattice& labels = override_ ? *override_ : own;
        if (override_) {
            for (const auto& [lo, hi] : p.lattice_pairs) {
                if (!labels.has_level(lo) || !labels.has_level(hi) || !labels.leq(lo, hi))
                    throw ParseError({1, 1}, "declared lattice pair " + lo + " < " + hi +
                                                 " conflicts with the lattice override");
            }
        }
        auto check_level = [&labels](const std::string& level, SourcePos pos) {
            if (!labels.has_level(level))
                throw ParseError(pos, "unknown label token '" + level + "'");
        };
        for (const auto& l : p.locals)
            check_level(l.level, l.pos);
        for (const auto& v : p.globals)
            check_level(v.level, v.pos);
        for (const auto& h : p.handlers) {
            check_level(h.mode_level, h.pos);
            check_level(h.param_level, h.pos);
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    const Lattice* override_;
};

} // namespace

Program parse_program(std::string_view source, const Lattice* lattice_override) {
    Lexer lexer(source);
    Parser parser(lexer.run(), lattice_override);
    return parser.run();
}

Lattice program_lattice(const Program& p) {
    if (p.lattice_pairs.empty())
        return Lattice::two_point();
    try {
        return Lattice::from_pairs(p.lattice_pairs);
    } catch (const LatticeError& e) {
        throw ParseError({1, 1}, e.what());
    }
}

Lattice merge_lattices(const std::vector<Program>& programs) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& p : programs) {
        if (p.lattice_pairs.empty())
            pairs.emplace_back("L", "H");
        else
            pairs.insert(pairs.end(), p.lattice_pairs.begin(), p.lattice_pairs.end());
    }
    if (pairs.empty())
        pairs.emplace_back("L", "H");
    return Lattice::from_pairs(pairs);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace oblivio
