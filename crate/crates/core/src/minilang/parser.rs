//! Recursive-descent parser for MJ.

use super::ast::*;
use super::lexer::{lex, SpannedTok, Tok};
use super::ParseError;

/// Parse UTF-8 MJ source into an untyped [`Program`].
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let toks = lex(source)?;
    if toks.len() == 1 {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        toks,
        at: 0,
        next_id: 0,
    };
    let mut classes = Vec::new();
    while !p.check(&Tok::Eof) {
        classes.push(p.class_decl()?);
    }
    if classes.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(Program {
        classes,
        node_count: p.next_id,
    })
}

struct Parser {
    toks: Vec<SpannedTok>,
    at: usize,
    next_id: u32,
}

impl Parser {
    fn id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn check(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.check(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("{}", t.describe())))
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn class_decl(&mut self) -> Result<ClassDecl, ParseError> {
        let pos = self.pos();
        self.expect(Tok::Class)?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while !self.check(&Tok::RBrace) {
            self.member(&name, &mut fields, &mut methods)?;
        }
        self.expect(Tok::RBrace)?;
        Ok(ClassDecl {
            name,
            fields,
            methods,
            pos,
        })
    }

    fn member(
        &mut self,
        class_name: &str,
        fields: &mut Vec<FieldDecl>,
        methods: &mut Vec<MethodDecl>,
    ) -> Result<(), ParseError> {
        let pos = self.pos();
        let public = self.eat(&Tok::Public);
        // constructor: bare class name followed by `(`
        if let Tok::Ident(name) = self.peek() {
            if name == class_name && self.peek2() == &Tok::LParen {
                if public {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "`public` applies to fields only".to_string(),
                    });
                }
                let name = self.ident()?;
                let (params, body) = self.method_rest()?;
                methods.push(MethodDecl {
                    name,
                    params,
                    ret: TypeExpr::Void,
                    body,
                    is_ctor: true,
                    pos,
                });
                return Ok(());
            }
        }
        let ty = self.type_expr(true)?;
        let name = self.ident()?;
        if self.check(&Tok::LParen) {
            if public {
                return Err(ParseError::Syntax {
                    pos,
                    message: "`public` applies to fields only".to_string(),
                });
            }
            let (params, body) = self.method_rest()?;
            methods.push(MethodDecl {
                name,
                params,
                ret: ty,
                body,
                is_ctor: false,
                pos,
            });
        } else {
            if ty == TypeExpr::Void {
                return Err(ParseError::Syntax {
                    pos,
                    message: "fields cannot have type void".to_string(),
                });
            }
            self.expect(Tok::Semi)?;
            fields.push(FieldDecl {
                name,
                ty,
                public,
                pos,
            });
        }
        Ok(())
    }

    fn method_rest(&mut self) -> Result<(Vec<Param>, Vec<Stmt>), ParseError> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.check(&Tok::RParen) {
            loop {
                let pos = self.pos();
                let ty = self.type_expr(false)?;
                let name = self.ident()?;
                params.push(Param { name, ty, pos });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        Ok((params, body))
    }

    /// Parses a type. `allow_void` is true only in return-type position.
    fn type_expr(&mut self, allow_void: bool) -> Result<TypeExpr, ParseError> {
        let base = match self.peek().clone() {
            Tok::Int => {
                self.bump();
                TypeExpr::Int
            }
            Tok::Float => {
                self.bump();
                TypeExpr::Float
            }
            Tok::Bool => {
                self.bump();
                TypeExpr::Bool
            }
            Tok::Char => {
                self.bump();
                TypeExpr::Char
            }
            Tok::Void => {
                self.bump();
                if !allow_void {
                    return Err(ParseError::Syntax {
                        pos: self.pos(),
                        message: "void is only valid as a return type".to_string(),
                    });
                }
                return Ok(TypeExpr::Void);
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "List" {
                    self.expect(Tok::Lt)?;
                    let elem = self.type_expr(false)?;
                    self.expect(Tok::Gt)?;
                    TypeExpr::List(Box::new(elem))
                } else if name == "Buffer" {
                    TypeExpr::Buffer
                } else {
                    TypeExpr::Class(name)
                }
            }
            _ => return Err(self.unexpected("a type")),
        };
        if self.check(&Tok::LBracket) && self.peek2() == &Tok::RBracket {
            self.bump();
            self.bump();
            if matches!(base, TypeExpr::Array(_)) {
                return Err(ParseError::Syntax {
                    pos: self.pos(),
                    message: "arrays are single-dimensional".to_string(),
                });
            }
            return Ok(TypeExpr::Array(Box::new(base)));
        }
        Ok(base)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.check(&Tok::RBrace) {
            if self.check(&Tok::Eof) {
                return Err(self.unexpected("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::If => {
                self.bump();
                let id = self.id();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let then_branch = self.block()?;
                let else_branch = if self.eat(&Tok::Else) {
                    Some(self.block()?)
                } else {
                    None
                };
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    },
                })
            }
            Tok::While => {
                self.bump();
                let id = self.id();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::While { cond, body },
                })
            }
            Tok::For => {
                self.bump();
                let id = self.id();
                self.expect(Tok::LParen)?;
                let init = if self.check(&Tok::Semi) {
                    self.bump();
                    None
                } else {
                    Some(Box::new(self.simple_stmt()?))
                };
                let cond = self.expr()?;
                self.expect(Tok::Semi)?;
                let update = if self.check(&Tok::RParen) {
                    None
                } else {
                    Some(Box::new(self.simple_stmt_no_semi()?))
                };
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::For {
                        init,
                        cond,
                        update,
                        body,
                    },
                })
            }
            Tok::Break => {
                self.bump();
                let id = self.id();
                self.expect(Tok::Semi)?;
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Break,
                })
            }
            Tok::Return => {
                self.bump();
                let id = self.id();
                let value = if self.check(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi)?;
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Return(value),
                })
            }
            Tok::LBrace => {
                let id = self.id();
                let stmts = self.block()?;
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Block(stmts),
                })
            }
            _ => {
                let s = self.simple_stmt()?;
                Ok(s)
            }
        }
    }

    /// Declaration, assignment, increment or call statement, consuming the
    /// trailing semicolon.
    fn simple_stmt(&mut self) -> Result<Stmt, ParseError> {
        let s = self.simple_stmt_no_semi()?;
        self.expect(Tok::Semi)?;
        Ok(s)
    }

    fn starts_decl(&self) -> bool {
        match self.peek() {
            Tok::Int | Tok::Float | Tok::Bool | Tok::Char => true,
            Tok::Ident(name) => {
                if name == "List" {
                    self.peek2() == &Tok::Lt
                } else if name == "Buffer" {
                    matches!(self.peek2(), Tok::Ident(_))
                } else {
                    // `C x` or `C[] x`
                    matches!(self.peek2(), Tok::Ident(_)) || self.peek2() == &Tok::LBracket
                }
            }
            _ => false,
        }
    }

    fn simple_stmt_no_semi(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.pos();
        // prefix increment: `++i` / `--i` (canonical form is postfix)
        if self.check(&Tok::PlusPlus) || self.check(&Tok::MinusMinus) {
            let negative = self.bump() == Tok::MinusMinus;
            let id = self.id();
            let target = self.postfix_expr()?;
            return Ok(Stmt {
                id,
                pos,
                kind: StmtKind::Incr { target, negative },
            });
        }
        // `C[] x` needs to be distinguished from `c[i] = e`: a decl has `[]`
        // with nothing between the brackets.
        let is_decl = match self.peek() {
            Tok::Ident(_) if self.peek2() == &Tok::LBracket => {
                self.toks.get(self.at + 2).map(|t| &t.tok) == Some(&Tok::RBracket)
            }
            _ => self.starts_decl(),
        };
        if is_decl {
            let id = self.id();
            let ty = self.type_expr(false)?;
            let name = self.ident()?;
            let init = if self.eat(&Tok::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            return Ok(Stmt {
                id,
                pos,
                kind: StmtKind::Decl { ty, name, init },
            });
        }
        let id = self.id();
        let target = self.expr()?;
        match self.peek().clone() {
            Tok::Assign => {
                self.bump();
                let value = self.expr()?;
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Assign { target, value },
                })
            }
            Tok::PlusAssign | Tok::MinusAssign | Tok::StarAssign | Tok::SlashAssign => {
                let op = match self.bump() {
                    Tok::PlusAssign => BinOp::Add,
                    Tok::MinusAssign => BinOp::Sub,
                    Tok::StarAssign => BinOp::Mul,
                    Tok::SlashAssign => BinOp::Div,
                    _ => unreachable!(),
                };
                let rhs = self.expr()?;
                // `x op= e` desugars to `x = x op e`; the duplicated target
                // gets fresh node ids.
                let dup = self.clone_fresh(&target);
                let bpos = rhs.pos;
                let value = Expr {
                    id: self.id(),
                    pos: bpos,
                    kind: ExprKind::Binary {
                        op,
                        lhs: Box::new(dup),
                        rhs: Box::new(rhs),
                    },
                };
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Assign { target, value },
                })
            }
            Tok::PlusPlus => {
                self.bump();
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Incr {
                        target,
                        negative: false,
                    },
                })
            }
            Tok::MinusMinus => {
                self.bump();
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Incr {
                        target,
                        negative: true,
                    },
                })
            }
            _ => {
                if !matches!(target.kind, ExprKind::Call { .. }) {
                    return Err(ParseError::Syntax {
                        pos: target.pos,
                        message: "only call expressions may stand alone as statements"
                            .to_string(),
                    });
                }
                Ok(Stmt {
                    id,
                    pos,
                    kind: StmtKind::Expr(target),
                })
            }
        }
    }

    fn clone_fresh(&mut self, e: &Expr) -> Expr {
        let id = self.id();
        let kind = match &e.kind {
            ExprKind::Name(n) => ExprKind::Name(n.clone()),
            ExprKind::Field { recv, name } => ExprKind::Field {
                recv: Box::new(self.clone_fresh(recv)),
                name: name.clone(),
            },
            ExprKind::Index { arr, idx } => ExprKind::Index {
                arr: Box::new(self.clone_fresh(arr)),
                idx: Box::new(self.clone_fresh(idx)),
            },
            other => other.clone(),
        };
        Expr {
            id,
            pos: e.pos,
            kind,
        }
    }

    // expression precedence: || < && < == != < relational < + - < * / % < unary < postfix

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn binary_level<F>(
        &mut self,
        ops: &[(Tok, BinOp)],
        mut next: F,
    ) -> Result<Expr, ParseError>
    where
        F: FnMut(&mut Self) -> Result<Expr, ParseError>,
    {
        let mut lhs = next(self)?;
        loop {
            let mut matched = None;
            for (tok, op) in ops {
                if self.check(tok) {
                    matched = Some(*op);
                    break;
                }
            }
            let Some(op) = matched else { break };
            self.bump();
            let id = self.id();
            let pos = lhs.pos;
            let rhs = next(self)?;
            lhs = Expr {
                id,
                pos,
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            };
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[(Tok::OrOr, BinOp::Or)], |p| p.and_expr())
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[(Tok::AndAnd, BinOp::And)], |p| p.eq_expr())
    }

    fn eq_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[(Tok::EqEq, BinOp::Eq), (Tok::NotEq, BinOp::Ne)], |p| {
            p.rel_expr()
        })
    }

    fn rel_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[
                (Tok::Le, BinOp::Le),
                (Tok::Ge, BinOp::Ge),
                (Tok::Lt, BinOp::Lt),
                (Tok::Gt, BinOp::Gt),
            ],
            |p| p.add_expr(),
        )
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)], |p| {
            p.mul_expr()
        })
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[
                (Tok::Star, BinOp::Mul),
                (Tok::Slash, BinOp::Div),
                (Tok::Percent, BinOp::Mod),
            ],
            |p| p.unary_expr(),
        )
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        if self.eat(&Tok::Minus) {
            let id = self.id();
            let operand = self.unary_expr()?;
            // fold negated literals so `-3` is a literal, not a Neg op
            let kind = match operand.kind {
                ExprKind::IntLit(v) => ExprKind::IntLit(v.wrapping_neg()),
                ExprKind::FloatLit(v) => ExprKind::FloatLit(-v),
                _ => ExprKind::Unary {
                    op: UnOp::Neg,
                    operand: Box::new(operand),
                },
            };
            return Ok(Expr { id, pos, kind });
        }
        if self.eat(&Tok::Bang) {
            let id = self.id();
            let operand = self.unary_expr()?;
            return Ok(Expr {
                id,
                pos,
                kind: ExprKind::Unary {
                    op: UnOp::Not,
                    operand: Box::new(operand),
                },
            });
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary_expr()?;
        loop {
            if self.check(&Tok::Dot) {
                self.bump();
                let pos = self.pos();
                let name = self.ident()?;
                if self.check(&Tok::LParen) {
                    let id = self.id();
                    let args = self.call_args()?;
                    // `Math.f(...)` is a static library call, not a method on
                    // a value.
                    let recv = match &e.kind {
                        ExprKind::Name(n) if n == "Math" => CallRecv::Math,
                        _ => CallRecv::Expr(Box::new(e)),
                    };
                    e = Expr {
                        id,
                        pos,
                        kind: ExprKind::Call { recv, name, args },
                    };
                } else {
                    let id = self.id();
                    e = Expr {
                        id,
                        pos,
                        kind: ExprKind::Field {
                            recv: Box::new(e),
                            name,
                        },
                    };
                }
            } else if self.check(&Tok::LBracket) {
                self.bump();
                let id = self.id();
                let pos = e.pos;
                let idx = self.expr()?;
                self.expect(Tok::RBracket)?;
                e = Expr {
                    id,
                    pos,
                    kind: ExprKind::Index {
                        arr: Box::new(e),
                        idx: Box::new(idx),
                    },
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.check(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::IntLit(v) => {
                self.bump();
                Ok(Expr {
                    id: self.id(),
                    pos,
                    kind: ExprKind::IntLit(v),
                })
            }
            Tok::FloatLit(v) => {
                self.bump();
                Ok(Expr {
                    id: self.id(),
                    pos,
                    kind: ExprKind::FloatLit(v),
                })
            }
            Tok::CharLit(c) => {
                self.bump();
                Ok(Expr {
                    id: self.id(),
                    pos,
                    kind: ExprKind::CharLit(c),
                })
            }
            Tok::True => {
                self.bump();
                Ok(Expr {
                    id: self.id(),
                    pos,
                    kind: ExprKind::BoolLit(true),
                })
            }
            Tok::False => {
                self.bump();
                Ok(Expr {
                    id: self.id(),
                    pos,
                    kind: ExprKind::BoolLit(false),
                })
            }
            Tok::Null => {
                self.bump();
                Ok(Expr {
                    id: self.id(),
                    pos,
                    kind: ExprKind::NullLit,
                })
            }
            Tok::New => {
                self.bump();
                let id = self.id();
                // `new T[len]` or `new C(args)` / `new List<T>()` / `new Buffer(n)`
                let base = self.type_expr(false)?;
                if self.check(&Tok::LBracket) {
                    self.bump();
                    let len = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    Ok(Expr {
                        id,
                        pos,
                        kind: ExprKind::NewArray {
                            elem: base,
                            len: Box::new(len),
                        },
                    })
                } else {
                    let args = self.call_args()?;
                    Ok(Expr {
                        id,
                        pos,
                        kind: ExprKind::New { ty: base, args },
                    })
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.check(&Tok::LParen) {
                    let id = self.id();
                    let args = self.call_args()?;
                    Ok(Expr {
                        id,
                        pos,
                        kind: ExprKind::Call {
                            recv: CallRecv::None,
                            name,
                            args,
                        },
                    })
                } else {
                    Ok(Expr {
                        id: self.id(),
                        pos,
                        kind: ExprKind::Name(name),
                    })
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_class() {
        let p = parse_program("class A { int f(int x) { return x + 1; } }").unwrap();
        assert_eq!(p.classes.len(), 1);
        let m = &p.classes[0].methods[0];
        assert_eq!(m.name, "f");
        assert_eq!(m.params.len(), 1);
        match &m.body[0].kind {
            StmtKind::Return(Some(e)) => match &e.kind {
                ExprKind::Binary { op, .. } => assert_eq!(*op, BinOp::Add),
                other => panic!("expected add, got {other:?}"),
            },
            other => panic!("expected return, got {other:?}"),
        }
    }

    #[test]
    fn reports_syntax_error_position() {
        let err = parse_program("class A { int f( { }").unwrap_err();
        match err {
            ParseError::Syntax { pos, .. } => {
                assert_eq!(pos.line, 1);
                assert_eq!(pos.col, 18);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn empty_source_is_its_own_error() {
        assert!(matches!(parse_program("  \n "), Err(ParseError::Empty)));
        assert!(matches!(
            parse_program("// only a comment"),
            Err(ParseError::Empty)
        ));
    }

    #[test]
    fn program_one_shape_has_three_top_level_statements() {
        let src = r#"
class CCNode {
    public List<CCNode> children_;
    void draw(int gl) { print(gl); }
    void visit(int gl) {
        if (children_ != null) { draw(gl); }
        draw(gl);
        if (children_ != null) { draw(gl); }
    }
}
"#;
        let p = parse_program(src).unwrap();
        let visit = p.method("CCNode", "visit").unwrap();
        assert_eq!(visit.body.len(), 3);
    }

    #[test]
    fn compound_assign_desugars() {
        let p = parse_program("class A { void f() { int x; x += 2; } }").unwrap();
        let body = &p.classes[0].methods[0].body;
        match &body[1].kind {
            StmtKind::Assign { value, .. } => {
                assert!(matches!(
                    value.kind,
                    ExprKind::Binary { op: BinOp::Add, .. }
                ));
            }
            other => panic!("expected assign, got {other:?}"),
        }
    }

    #[test]
    fn constructor_is_recognized() {
        let p = parse_program("class P { int x_; P(int x) { x_ = x; } }").unwrap();
        let m = &p.classes[0].methods[0];
        assert!(m.is_ctor);
        assert_eq!(m.ret, TypeExpr::Void);
    }

    #[test]
    fn decl_vs_index_assignment() {
        let p = parse_program(
            "class A { void f() { int[] v; v = new int[3]; v[0] = 1; A[] w; } }",
        )
        .unwrap();
        let body = &p.classes[0].methods[0].body;
        assert!(matches!(body[0].kind, StmtKind::Decl { .. }));
        assert!(matches!(body[2].kind, StmtKind::Assign { .. }));
        assert!(matches!(body[3].kind, StmtKind::Decl { .. }));
    }
}
