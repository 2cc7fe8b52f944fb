#include "oblivio/ast.hpp"

#include <sstream>

namespace oblivio {

ExprPtr Expr::int_lit(int64_t v, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::IntLit;
    e->int_value = v;
    e->pos = p;
    return e;
}

ExprPtr Expr::str_lit(std::string s, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::StrLit;
    e->name = std::move(s);
    e->pos = p;
    return e;
}

ExprPtr Expr::var(std::string name, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->name = std::move(name);
    e->pos = p;
    return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Binary;
    e->op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    e->pos = p;
    return e;
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case Expr::Kind::IntLit: return a.int_value == b.int_value;
    case Expr::Kind::StrLit:
    case Expr::Kind::Var: return a.name == b.name;
    case Expr::Kind::Binary:
        return a.op == b.op && expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
    }
    return false;
}

namespace {
CommandPtr make_cmd(Command::Kind k, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = k;
    c->pos = p;
    return c;
}
} // namespace

CommandPtr Command::skip(SourcePos p) {
    return make_cmd(Kind::Skip, p);
}

CommandPtr Command::seq(CommandPtr a, CommandPtr b, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::Seq;
    c->pos = p;
    c->c1 = std::move(a);
    c->c2 = std::move(b);
    return c;
}

CommandPtr Command::assign(std::string x, ExprPtr e, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::Assign;
    c->var = std::move(x);
    c->expr = std::move(e);
    c->pos = p;
    return c;
}

CommandPtr Command::obliv_assign(std::string x, ExprPtr e, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::OblivAssign;
    c->var = std::move(x);
    c->expr = std::move(e);
    c->pos = p;
    return c;
}

CommandPtr Command::local_input(std::string x, std::string ch, ExprPtr e, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::LocalInput;
    c->var = std::move(x);
    c->channel = std::move(ch);
    c->expr = std::move(e);
    c->pos = p;
    return c;
}

CommandPtr Command::send(std::string ch, ExprPtr e, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::Send;
    c->channel = std::move(ch);
    c->expr = std::move(e);
    c->pos = p;
    return c;
}

CommandPtr Command::output(std::string ch, ExprPtr e, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::Output;
    c->channel = std::move(ch);
    c->expr = std::move(e);
    c->pos = p;
    return c;
}

CommandPtr Command::if_(ExprPtr g, CommandPtr t, CommandPtr f, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::If;
    c->expr = std::move(g);
    c->c1 = std::move(t);
    c->c2 = std::move(f);
    c->pos = p;
    return c;
}

CommandPtr Command::while_(ExprPtr g, CommandPtr body, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::While;
    c->expr = std::move(g);
    c->c1 = std::move(body);
    c->pos = p;
    return c;
}

CommandPtr Command::obliv_if(ExprPtr g, CommandPtr t, CommandPtr f, SourcePos p) {
    auto c = std::make_shared<Command>();
    c->kind = Kind::OblivIf;
    c->expr = std::move(g);
    c->c1 = std::move(t);
    c->c2 = std::move(f);
    c->pos = p;
    return c;
}

CommandPtr Command::stop() {
    static const CommandPtr instance = make_cmd(Kind::Stop, {});
    return instance;
}

CommandPtr Command::pop() {
    static const CommandPtr instance = make_cmd(Kind::Pop, {});
    return instance;
}

bool command_equal(const Command& a, const Command& b) {
    if (a.kind != b.kind || a.var != b.var || a.channel != b.channel)
        return false;
    if ((a.expr == nullptr) != (b.expr == nullptr))
        return false;
    if (a.expr && !expr_equal(*a.expr, *b.expr))
        return false;
    for (auto pair : {std::pair{a.c1, b.c1}, std::pair{a.c2, b.c2}}) {
        if ((pair.first == nullptr) != (pair.second == nullptr))
            return false;
        if (pair.first && !command_equal(*pair.first, *pair.second))
            return false;
    }
    return true;
}

const Handler* Program::find_handler(const std::string& name) const {
    for (const auto& h : handlers)
        if (h.name == name)
            return &h;
    return nullptr;
}

const VarDecl* Program::find_global(const std::string& name) const {
    for (const auto& v : globals)
        if (v.name == name)
            return &v;
    return nullptr;
}

const LocalChannelDecl* Program::find_local(const std::string& name) const {
    for (const auto& l : locals)
        if (l.name == name)
            return &l;
    return nullptr;
}

bool program_equal(const Program& a, const Program& b) {
    if (a.node_id != b.node_id || a.lattice_pairs != b.lattice_pairs)
        return false;
    if (a.locals.size() != b.locals.size() || a.globals.size() != b.globals.size() ||
        a.handlers.size() != b.handlers.size())
        return false;
    for (std::size_t i = 0; i < a.locals.size(); ++i) {
        const auto& x = a.locals[i];
        const auto& y = b.locals[i];
        if (x.name != y.name || x.sort != y.sort || x.level != y.level)
            return false;
    }
    for (std::size_t i = 0; i < a.globals.size(); ++i) {
        const auto& x = a.globals[i];
        const auto& y = b.globals[i];
        if (x.name != y.name || x.sort != y.sort || x.level != y.level || x.init != y.init)
            return false;
    }
    for (std::size_t i = 0; i < a.handlers.size(); ++i) {
        const auto& x = a.handlers[i];
        const auto& y = b.handlers[i];
        if (x.name != y.name || x.mode_level != y.mode_level || x.potential != y.potential ||
            x.param_name != y.param_name || x.param_sort != y.param_sort ||
            x.param_level != y.param_level || !command_equal(*x.body, *y.body))
            return false;
    }
    return true;
}

SizedValue default_value(Sort sort) {
    if (sort == Sort::Int)
        return SizedValue::of_int(0);
    return SizedValue::of_string("");
}

namespace {

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += ch;
        }
    }
    out += '"';
    return out;
}

int precedence(BinOp op) {
    switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 3;
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Concat: return 4;
    case BinOp::Mul: return 5;
    }
    return 0;
}

void print_expr(std::ostringstream& out, const Expr& e, int parent_prec) {
    switch (e.kind) {
    case Expr::Kind::IntLit: out << e.int_value; return;
    case Expr::Kind::StrLit: out << quote_string(e.name); return;
    case Expr::Kind::Var: out << e.name; return;
    case Expr::Kind::Binary: {
        int prec = precedence(e.op);
        bool parens = prec < parent_prec;
        if (parens)
            out << '(';
        print_expr(out, *e.lhs, prec);
        out << ' ' << binop_symbol(e.op) << ' ';
        print_expr(out, *e.rhs, prec + 1); // left-associative
        if (parens)
            out << ')';
        return;
    }
    }
}

std::string ind(int n) {
    return std::string(static_cast<std::size_t>(n) * 4, ' ');
}

void print_cmd(std::ostringstream& out, const Command& c, int indent);

// Seq chains print flat inside a block.
void print_block(std::ostringstream& out, const Command& c, int indent) {
    out << "{\n";
    const Command* cur = &c;
    while (cur->kind == Command::Kind::Seq) {
        print_cmd(out, *cur->c1, indent + 1);
        cur = cur->c2.get();
    }
    print_cmd(out, *cur, indent + 1);
    out << ind(indent) << "}";
}

void print_cmd(std::ostringstream& out, const Command& c, int indent) {
    switch (c.kind) {
    case Command::Kind::Skip:
        out << ind(indent) << "skip;\n";
        return;
    case Command::Kind::Seq:
        print_cmd(out, *c.c1, indent);
        print_cmd(out, *c.c2, indent);
        return;
    case Command::Kind::Assign:
        out << ind(indent) << c.var << " = " << pretty_print(*c.expr) << ";\n";
        return;
    case Command::Kind::OblivAssign:
        out << ind(indent) << c.var << " ?= " << pretty_print(*c.expr) << ";\n";
        return;
    case Command::Kind::LocalInput:
        out << ind(indent) << c.var << " ?= input(" << c.channel << ", "
            << pretty_print(*c.expr) << ");\n";
        return;
    case Command::Kind::Send:
        out << ind(indent) << "send(" << c.channel << ", " << pretty_print(*c.expr) << ");\n";
        return;
    case Command::Kind::Output:
        out << ind(indent) << "output(" << c.channel << ", " << pretty_print(*c.expr) << ");\n";
        return;
    case Command::Kind::If:
    case Command::Kind::OblivIf:
        out << ind(indent) << (c.kind == Command::Kind::If ? "if " : "oblif ")
            << pretty_print(*c.expr) << "\n" << ind(indent) << "then ";
        print_block(out, *c.c1, indent);
        out << "\n" << ind(indent) << "else ";
        print_block(out, *c.c2, indent);
        out << "\n";
        return;
    case Command::Kind::While:
        out << ind(indent) << "while " << pretty_print(*c.expr) << " do ";
        print_block(out, *c.c1, indent);
        out << "\n";
        return;
    case Command::Kind::Stop:
        out << ind(indent) << "stop;\n";
        return;
    case Command::Kind::Pop:
        out << ind(indent) << "pop;\n";
        return;
    }
}

} // namespace

std::string pretty_print(const Expr& e) {
    std::ostringstream out;
    print_expr(out, e, 0);
    return out.str();
}

std::string pretty_print(const Command& c, int indent) {
    std::ostringstream out;
    print_cmd(out, c, indent);
    return out.str();
}

std::string pretty_print(const Program& p) {
    std::ostringstream out;
    out << p.node_id << "\n\n";
    if (!p.lattice_pairs.empty()) {
        out << "lattice ";
        for (std::size_t i = 0; i < p.lattice_pairs.size(); ++i) {
            if (i)
                out << ", ";
            out << p.lattice_pairs[i].first << " < " << p.lattice_pairs[i].second;
        }
        out << ";\n";
    }
    for (const auto& l : p.locals)
        out << "local channel " << l.name << " : " << sort_name(l.sort) << "@" << l.level
            << ";\n";
    for (const auto& v : p.globals) {
        out << "var " << v.name << " : " << sort_name(v.sort) << "@" << v.level;
        if (v.init) {
            out << " = ";
            if (v.init->is_int())
                out << v.init->as_int();
            else
                out << quote_string(v.init->as_string());
        }
        out << ";\n";
    }
    for (const auto& h : p.handlers) {
        out << "\n" << h.name << "@" << h.mode_level;
        if (h.potential != 0)
            out << " $" << h.potential;
        out << " (" << h.param_name << " : " << sort_name(h.param_sort) << "@" << h.param_level
            << ") ";
        std::ostringstream body;
        print_block(body, *h.body, 0);
        out << body.str() << "\n";
    }
    return out.str();
}

} // namespace oblivio
