"""Shared parser fixtures: programs covering every grammar production and
malformed inputs with their expected error positions."""

# Each entry: (name, source). All must parse, validate and round-trip.
VALID_PROGRAMS = [
    ("minimal_function", "int main(){}"),
    ("global_decl", "int x;"),
    ("global_decl_init", "int x = 5;"),
    ("global_decl_list", "int a, b, c;"),
    ("array_decl", "int buf[16];"),
    ("float_types", "float f(){ double d = 1.5; return 0; }"),
    ("char_type", "char c(){ char ch = 'a'; return ch; }"),
    ("void_fn", "void go(){ return; }"),
    ("params", "int add(int a, int b){ return a + b; }"),
    ("array_param", "int first(int a[10]){ return a[0]; }"),
    ("if_plain", "int f(int x){ if (x > 0) { x = 1; } return x; }"),
    ("if_else", "int f(int x){ if (x > 0) { x = 1; } else { x = 2; } return x; }"),
    ("if_no_braces", "int f(int x){ if (x) x = 1; else x = 2; return x; }"),
    ("dangling_else",
     "int f(int x){ if (x) if (x > 1) x = 2; else x = 3; return x; }"),
    ("while_loop", "int f(){ int i = 0; while (i < 10) { i = i + 1; } return i; }"),
    ("do_while", "int f(){ int i = 0; do { i = i + 1; } while (i < 3); return i; }"),
    ("for_full",
     "int f(){ int s = 0; int i; for (i = 0; i < 4; i = i + 1) { s = s + i; } return s; }"),
    ("for_empty_all", "int f(){for(;;) break;}"),
    ("for_decl_init", "int f(){ for (int i = 0; i < 3; i = i + 1) { } return 0; }"),
    ("for_missing_cond", "int f(){ int i; for (i = 0; ; i = i + 1) { break; } return i; }"),
    ("switch_default",
     "int f(int x){ int r = 0; switch (x) { case 1: r = 1; break; "
     "case 2: r = 2; break; default: r = 9; break; } return r; }"),
    ("switch_multi_stmt",
     "int f(int x){ switch (x) { case 0: x = 1; x = x + 1; break; } return x; }"),
    ("switch_empty_default", "int f(int x){ switch (x) { default: } return x; }"),
    ("continue_stmt",
     "int f(){ int i; int s = 0; for (i = 0; i < 9; i = i + 1) "
     "{ if (i % 2 == 0) continue; s = s + i; } return s; }"),
    ("empty_statement", "int f(){ ; ; return 0; }"),
    ("nested_compound", "int f(){ { int x = 1; { x = 2; } } return 0; }"),
    ("precedence",
     "int f(){ return 1 + 2 * 3 - 4 / 2 % 3 < 5 == 1 && 2 > 1 || 0; }"),
    ("bitops", "int f(int a, int b){ return a & b | a ^ b; }"),
    ("shifts", "int f(int a){ return a << 2 >> 1; }"),
    ("unary_ops", "int f(int a){ return !a + -a + +a; }"),
    ("prefix_incr", "int f(int a){ ++a; --a; return a; }"),
    ("postfix_incr", "int f(int a){ a++; a--; return a; }"),
    ("assign_ops", "int f(int a){ a += 1; a -= 2; a *= 3; a /= 4; return a; }"),
    ("assign_chain", "int f(int a, int b){ a = b = 3; return a; }"),
    ("call_no_args", "int g(){ return 1; } int f(){ return g(); }"),
    ("call_args", "int g(int a, int b){ return a; } int f(){ return g(1, 2 + 3); }"),
    ("recursion", "int fact(int n){ if (n < 2) return 1; return n * fact(n - 1); }"),
    ("array_ref", "int f(){ int a[4]; a[0] = 1; a[1] = a[0] + 1; return a[1]; }"),
    ("string_literal", 'int f(){ char s[4]; s[0] = \'x\'; return "hi" == s; }'),
    ("float_literals", "float f(){ float x = 1.5; float y = 2.0e3; return x * y; }"),
    ("comments", "int f(){ // line comment\n  /* block\n comment */ return 0; }"),
    ("parenthesized", "int f(int a){ return (a + 1) * (a - 1); }"),
    ("address_of", "int f(int a){ return &a == &a; }"),
    ("two_functions", "int a(){ return 1; } int b(){ return a() + 1; }"),
]

# Each entry: (name, source, (line, column) of the reported error).
MALFORMED_PROGRAMS = [
    ("missing_semicolon", "int f(){ int x = 1 return x; }", (1, 20)),
    ("unbalanced_paren", "int f(){ return (1 + 2; }", (1, 23)),
    ("missing_close_brace", "int f(){ return 0;", (1, 19)),
    ("stray_top_level", "return 0;", (1, 1)),
    ("bad_funcdef_body", "int f() return 0;", (1, 9)),
    ("missing_cond", "int f(){ while () { } return 0; }", (1, 17)),
    ("for_missing_semi", "int f(){ for (i = 0) { } return 0; }", (1, 20)),
    ("case_outside_switch_body", "int f(){ switch (1) { int x; } return 0; }", (1, 23)),
    ("missing_while_in_do", "int f(){ do { } until (1); return 0; }", (1, 17)),
    ("double_operator", "int f(){ return 1 + * 2; }", (1, 21)),
    ("empty_parens_expr", "int f(){ return (); }", (1, 18)),
    ("assign_to_nothing", "int f(){ = 3; return 0; }", (1, 10)),
    ("unterminated_string", 'int f(){ char c = "abc; }', None),
    ("unknown_character", "int f(){ int x = 1 @ 2; return x; }", None),
]
