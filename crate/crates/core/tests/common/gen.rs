//! Seeded random generator of structurally valid scripts.

use dsqlt::ast::*;
use dsqlt::lexer::TokenKind;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const NAMES: &[&str] = &[
    "item1", "item2", "src", "dst", "A", "B", "total", "NAME", "x_2", "Period", "bts_id", "omc",
    "k", "val9", "T_1",
];
const FUNCS: &[&str] = &["percent", "TO_CHAR", "nvl", "f", "abs"];
const TYPES: &[&str] = &[
    "NUMBER",
    "VARCHAR(20)",
    "NUMBER(10,2)",
    "VARCHAR2(8) NOT NULL",
    "DATE",
];

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Gen { rng }
    }

    fn name(&mut self) -> String {
        NAMES.choose(&mut self.rng).unwrap().to_string()
    }

    fn qname(&mut self, max_parts: usize) -> QualifiedName {
        let n = self.rng.gen_range(1..=max_parts);
        QualifiedName((0..n).map(|_| self.name()).collect())
    }

    fn number(&mut self) -> String {
        let mut s = self.rng.gen_range(0..1000).to_string();
        if self.rng.gen_bool(0.2) {
            s = format!("{s}.{}", self.rng.gen_range(0..100));
        }
        if self.rng.gen_bool(0.2) {
            s = format!("-{s}");
        }
        s
    }

    fn term(&mut self, depth: u32) -> Term {
        let pick = if depth > 2 {
            self.rng.gen_range(0..3)
        } else {
            self.rng.gen_range(0..5)
        };
        match pick {
            0 => Term::Column(self.qname(2)),
            1 => Term::Number(self.number()),
            2 => Term::Str(format!("'{} {}'", self.name(), self.rng.gen_range(0..9))),
            3 => {
                let n = self.rng.gen_range(0..=3);
                Term::Call {
                    name: FUNCS.choose(&mut self.rng).unwrap().to_string(),
                    args: (0..n).map(|_| self.expr(depth + 1)).collect(),
                }
            }
            _ => Term::Paren(Box::new(self.expr(depth + 1))),
        }
    }

    fn expr(&mut self, depth: u32) -> Expression {
        let first = self.term(depth);
        let n = if depth > 2 {
            0
        } else {
            self.rng.gen_range(0..=3)
        };
        let rest = (0..n)
            .map(|_| {
                let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div]
                    .choose(&mut self.rng)
                    .unwrap();
                (op, self.term(depth + 1))
            })
            .collect();
        Expression { first, rest }
    }

    fn condition(&mut self) -> Condition {
        let mut tokens = Vec::new();
        let parts = self.rng.gen_range(1..=2);
        for i in 0..parts {
            if i > 0 {
                let joiner = if self.rng.gen_bool(0.5) { "AND" } else { "or" };
                tokens.push(tok(TokenKind::Ident, joiner));
            }
            let paren = self.rng.gen_bool(0.2);
            if paren {
                tokens.push(tok(TokenKind::LParen, "("));
            }
            let name = self.qname(2);
            for (j, part) in name.0.iter().enumerate() {
                if j > 0 {
                    tokens.push(tok(TokenKind::Dot, "."));
                }
                tokens.push(tok(TokenKind::Ident, part));
            }
            match self.rng.gen_range(0..4) {
                0 => tokens.push(tok(TokenKind::Assign, "=")),
                1 => tokens.push(tok(TokenKind::Operator, ">")),
                2 => tokens.push(tok(TokenKind::Operator, "<>")),
                _ => tokens.push(tok(TokenKind::Operator, "<=")),
            }
            if self.rng.gen_bool(0.5) {
                tokens.push(tok(
                    TokenKind::Number,
                    &self.rng.gen_range(0..500).to_string(),
                ));
            } else {
                tokens.push(tok(TokenKind::Str, &format!("'{}'", self.name())));
            }
            if paren {
                tokens.push(tok(TokenKind::RParen, ")"));
            }
        }
        Condition { tokens }
    }

    fn conditions(&mut self, max: usize) -> Vec<Condition> {
        let n = self.rng.gen_range(0..=max);
        (0..n).map(|_| self.condition()).collect()
    }

    fn from(&mut self, min: usize) -> Vec<TableRef> {
        let n = self.rng.gen_range(min..=3.max(min));
        (0..n)
            .map(|_| TableRef {
                name: self.qname(2),
                alias: self.rng.gen_bool(0.4).then(|| self.name()),
            })
            .collect()
    }

    /// Select-list style assignments: all wildcard or all named, DISTINCT
    /// only on the first, optional aliases.
    fn select_items(&mut self, min: usize, max: usize) -> Vec<Assignment> {
        let n = self.rng.gen_range(min..=max);
        let wildcard = self.rng.gen_bool(0.2);
        let mut items: Vec<Assignment> = (0..n)
            .map(|_| {
                let target = if wildcard {
                    Target::Wildcard
                } else {
                    Target::Column(self.qname(1))
                };
                let mut a = Assignment::new(target, self.expr(0));
                if self.rng.gen_bool(0.3) {
                    a.alias = Some(self.name());
                }
                a
            })
            .collect();
        if wildcard && n == 1 && self.rng.gen_bool(0.5) {
            items[0] = Assignment::new(Target::Wildcard, Expression::term(Term::Star));
        }
        if let Some(first) = items.first_mut() {
            first.distinct = self.rng.gen_bool(0.25);
        }
        items
    }

    fn query_block(
        &mut self,
        table: &QualifiedName,
        command: CommandKind,
        same: bool,
    ) -> OperationBlock {
        let mut b = OperationBlock::new(table.clone(), command);
        if same {
            b.same_marker = true;
        } else {
            b.assignments = self.select_items(0, 8);
        }
        b.from = self.from(1);
        b.filter = self.conditions(3);
        let g = self.rng.gen_range(0..=2);
        b.group_by = (0..g).map(|_| self.expr(1)).collect();
        b.having = self.conditions(2);
        let o = self.rng.gen_range(0..=2);
        b.order_by = (0..o)
            .map(|_| OrderItem {
                expr: self.expr(1),
                direction: *[None, Some(Direction::Asc), Some(Direction::Desc)]
                    .choose(&mut self.rng)
                    .unwrap(),
            })
            .collect();
        b
    }

    pub fn block(&mut self, command: CommandKind) -> OperationBlock {
        let table = self.qname(2);
        let mut b = OperationBlock::new(table.clone(), command);
        match command {
            CommandKind::InsertSelect | CommandKind::CreateView | CommandKind::CreateTableAs => {
                return self.query_block(&table, command, false)
            }
            CommandKind::InsertValues => {
                let n = self.rng.gen_range(0..=8);
                b.assignments = (0..n)
                    .map(|_| Assignment::new(Target::Column(self.qname(1)), self.expr(0)))
                    .collect();
            }
            CommandKind::Update => {
                if self.rng.gen_bool(0.4) {
                    let items = self.select_items(1, 8);
                    let items: Vec<Assignment> = items
                        .into_iter()
                        .map(|mut a| {
                            if a.target == Target::Wildcard {
                                a.target = Target::Column(self.qname(1));
                                if a.expr.is_star() {
                                    a.expr = self.expr(0);
                                }
                            }
                            a
                        })
                        .collect();
                    if self.rng.gen_bool(0.3) {
                        b.assignments = (0..items.len())
                            .map(|_| {
                                Assignment::new(
                                    Target::Column(self.qname(1)),
                                    Expression::term(Term::Star),
                                )
                            })
                            .collect();
                    }
                    let from = self.from(0);
                    let filter = self.conditions(2);
                    b.nested = Some(NestedSelect {
                        items,
                        from,
                        filter,
                    });
                } else {
                    let n = self.rng.gen_range(0..=8);
                    b.assignments = (0..n)
                        .map(|_| Assignment::new(Target::Column(self.qname(1)), self.expr(0)))
                        .collect();
                }
                b.filter = self.conditions(3);
            }
            CommandKind::Delete => {
                b.from = self.from(0).into_iter().take(1).collect();
                b.filter = self.conditions(3);
            }
            CommandKind::CreateTableBasic => {
                let n = self.rng.gen_range(0..=8);
                b.assignments = (0..n)
                    .map(|_| {
                        let ty = TYPES.choose(&mut self.rng).unwrap().to_string();
                        Assignment::new(
                            Target::Column(self.qname(1)),
                            Expression::term(Term::TypeDecl(ty)),
                        )
                    })
                    .collect();
            }
            CommandKind::CreateIndex => {
                let on = self.qname(1);
                let n = self.rng.gen_range(0..=8);
                b.assignments = (0..n)
                    .map(|_| {
                        Assignment::new(
                            Target::Column(on.clone()),
                            Expression::column(&self.name()),
                        )
                    })
                    .collect();
            }
            CommandKind::Truncate | CommandKind::DropTable | CommandKind::DropView => {}
        }
        b
    }

    /// A chain of one block, or of query blocks joined by up to three connectors.
    pub fn chain(&mut self, command: CommandKind, connectors: usize) -> Chain {
        if connectors == 0 || !command.is_query_family() {
            return Chain::single(self.block(command));
        }
        let table = self.qname(2);
        let mut blocks = vec![self.query_block(&table, command, false)];
        for _ in 0..connectors {
            let same = self.rng.gen_bool(0.5);
            blocks.push(self.query_block(&table, command, same));
        }
        let connectors = (0..connectors)
            .map(|_| {
                *[
                    SetOperator::Union,
                    SetOperator::Intersect,
                    SetOperator::Minus,
                ]
                .choose(&mut self.rng)
                .unwrap()
            })
            .collect();
        Chain { blocks, connectors }
    }

    /// Script number `i` of a batch; kinds rotate so every kind appears.
    pub fn script(&mut self, i: usize) -> Script {
        let n = self.rng.gen_range(1..=4);
        let chains = (0..n)
            .map(|j| {
                let kind = CommandKind::ALL[(i + j) % CommandKind::ALL.len()];
                let connectors = if kind.is_query_family() {
                    self.rng.gen_range(0..=3)
                } else {
                    0
                };
                self.chain(kind, connectors)
            })
            .collect();
        Script { chains }
    }
}

fn tok(kind: TokenKind, text: &str) -> CondToken {
    CondToken {
        kind,
        text: text.to_string(),
    }
}
