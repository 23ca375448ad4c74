//! SPICE-like netlist parsing and node resolution.
//!
//! # Supported syntax
//!
//! ```text
//! * comment line
//! R<name> <n+> <n-> <ohms>                 resistor
//! G<name> <k> <k'> <j> <j'> <siemens>      VCCS: current g*(Vj - Vj') into k, out of k'
//! M<name> <drain> <gate> <source> gm=<S> gds=<S>
//! .short <a> <b>                           merge two nodes (supply shorting)
//! .order <n1> <n2> ...                     fix node index order
//! .title <text>                            optional title
//! ```
//!
//! Values accept scientific notation (e.g. `5.155032E-04`). Node names are
//! case-sensitive. Element kind is selected by the first letter of the name,
//! case-insensitively.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A circuit element.
///
/// The VCCS node order is fixed as (k, k', j, j'): output pair first, control
/// pair second, matching the row/column labels of its conductance stamp.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Resistor {
        name: String,
        nodes: [String; 2],
        resistance_ohms: f64,
    },
    Vccs {
        name: String,
        nodes: [String; 4],
        transconductance_siemens: f64,
    },
    /// A MOS operating-point model: gm-controlled current source from drain
    /// to source with the gate-source voltage as control, plus a drain-source
    /// resistor of value 1/gds.
    Mos {
        name: String,
        /// Ordered drain, gate, source.
        nodes: [String; 3],
        gm_siemens: f64,
        gds_siemens: f64,
    },
}

impl Element {
    pub fn name(&self) -> &str {
        match self {
            Element::Resistor { name, .. } => name,
            Element::Vccs { name, .. } => name,
            Element::Mos { name, .. } => name,
        }
    }

    pub fn node_names(&self) -> &[String] {
        match self {
            Element::Resistor { nodes, .. } => nodes,
            Element::Vccs { nodes, .. } => nodes,
            Element::Mos { nodes, .. } => nodes,
        }
    }
}

/// A parsed netlist: elements plus node-merge and ordering directives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Netlist {
    pub title: Option<String>,
    pub elements: Vec<Element>,
    /// Node pairs to be unified (`.short` directives).
    pub merges: Vec<(String, String)>,
    /// Explicit node index order (`.order` directive), if given.
    pub order: Option<Vec<String>>,
}

/// Bijective map between canonical node names and indices `0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeMap {
    /// Builds a map from an ordered list of distinct names.
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidMatrix(format!("duplicate node name '{n}'")));
            }
        }
        Ok(NodeMap { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Index lookup that reports unknown names as errors.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }
}

/// Parses netlist text. Comments and blank lines are ignored; every other
/// line must be an element or a directive.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut netlist = Netlist::default();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }

        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let head = fields[0];

        if let Some(directive) = head.strip_prefix('.') {
            parse_directive(&mut netlist, &directive.to_ascii_lowercase(), &fields, line)?;
            continue;
        }

        let kind = head.chars().next().unwrap().to_ascii_uppercase();
        let element = match kind {
            'R' => parse_resistor(&fields, line)?,
            'G' => parse_vccs(&fields, line)?,
            'M' => parse_mos(&fields, line)?,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown element prefix '{other}'"),
                })
            }
        };
        netlist.elements.push(element);
    }

    Ok(netlist)
}

fn parse_directive(
    netlist: &mut Netlist,
    directive: &str,
    fields: &[&str],
    line: usize,
) -> Result<()> {
    match directive {
        "short" => {
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    msg: format!(".short expects 2 node names, got {}", fields.len() - 1),
                });
            }
            netlist
                .merges
                .push((fields[1].to_string(), fields[2].to_string()));
            Ok(())
        }
        "order" => {
            if fields.len() < 2 {
                return Err(Error::Parse {
                    line,
                    msg: ".order expects at least one node name".to_string(),
                });
            }
            netlist.order = Some(fields[1..].iter().map(|s| s.to_string()).collect());
            Ok(())
        }
        "title" => {
            netlist.title = Some(fields[1..].join(" "));
            Ok(())
        }
        other => Err(Error::Parse {
            line,
            msg: format!("unknown directive '.{other}'"),
        }),
    }
}

fn parse_value(token: &str, what: &str, line: usize) -> Result<f64> {
    token.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("non-numeric {what} '{token}'"),
    })
}

fn check_node(token: &str, line: usize) -> Result<String> {
    if token.is_empty() {
        return Err(Error::Parse {
            line,
            msg: "empty node name".to_string(),
        });
    }
    Ok(token.to_string())
}

fn parse_resistor(fields: &[&str], line: usize) -> Result<Element> {
    if fields.len() != 4 {
        return Err(Error::Parse {
            line,
            msg: format!("resistor expects 3 fields after the name, got {}", fields.len() - 1),
        });
    }
    let value = parse_value(fields[3], "resistance", line)?;
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Parse {
            line,
            msg: format!("nonpositive resistance {value}"),
        });
    }
    let a = check_node(fields[1], line)?;
    let b = check_node(fields[2], line)?;
    if a == b {
        return Err(Error::Parse {
            line,
            msg: format!("resistor nodes must be distinct, both are '{a}'"),
        });
    }
    Ok(Element::Resistor {
        name: fields[0].to_string(),
        nodes: [a, b],
        resistance_ohms: value,
    })
}

fn parse_vccs(fields: &[&str], line: usize) -> Result<Element> {
    if fields.len() != 6 {
        return Err(Error::Parse {
            line,
            msg: format!("vccs expects 5 fields after the name, got {}", fields.len() - 1),
        });
    }
    let value = parse_value(fields[5], "transconductance", line)?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite transconductance {value}"),
        });
    }
    let k = check_node(fields[1], line)?;
    let kp = check_node(fields[2], line)?;
    let j = check_node(fields[3], line)?;
    let jp = check_node(fields[4], line)?;
    if k == kp {
        return Err(Error::Parse {
            line,
            msg: format!("vccs output pair must be distinct, both are '{k}'"),
        });
    }
    if j == jp {
        return Err(Error::Parse {
            line,
            msg: format!("vccs control pair must be distinct, both are '{j}'"),
        });
    }
    Ok(Element::Vccs {
        name: fields[0].to_string(),
        nodes: [k, kp, j, jp],
        transconductance_siemens: value,
    })
}

fn parse_mos(fields: &[&str], line: usize) -> Result<Element> {
    if fields.len() != 6 {
        return Err(Error::Parse {
            line,
            msg: format!(
                "mos expects drain gate source gm=<S> gds=<S>, got {} fields",
                fields.len() - 1
            ),
        });
    }
    let mut gm = None;
    let mut gds = None;
    for token in &fields[4..6] {
        if let Some(v) = token.strip_prefix("gm=") {
            gm = Some(parse_value(v, "gm", line)?);
        } else if let Some(v) = token.strip_prefix("gds=") {
            gds = Some(parse_value(v, "gds", line)?);
        } else {
            return Err(Error::Parse {
                line,
                msg: format!("expected gm=<S> or gds=<S>, got '{token}'"),
            });
        }
    }
    let (Some(gm), Some(gds)) = (gm, gds) else {
        return Err(Error::Parse {
            line,
            msg: "mos requires both gm= and gds=".to_string(),
        });
    };
    if !gm.is_finite() || !gds.is_finite() {
        return Err(Error::Parse {
            line,
            msg: "mos parameters must be finite".to_string(),
        });
    }
    Ok(Element::Mos {
        name: fields[0].to_string(),
        nodes: [
            check_node(fields[1], line)?,
            check_node(fields[2], line)?,
            check_node(fields[3], line)?,
        ],
        gm_siemens: gm,
        gds_siemens: gds,
    })
}

/// Expands a MOS element into its small-signal equivalent: a VCCS from drain
/// to source controlled by the gate-source voltage, plus a drain-source
/// resistor of value 1/gds.
///
/// The control pair is fixed as (gate, source); the Example-3 style op-amp
/// fixtures validate this orientation numerically.
pub fn expand_mos(element: &Element) -> Result<Vec<Element>> {
    let Element::Mos {
        name,
        nodes: [drain, gate, source],
        gm_siemens,
        gds_siemens,
    } = element
    else {
        return Err(Error::DegenerateElement(format!(
            "expand_mos requires a MOS element, got '{}'",
            element.name()
        )));
    };
    if *gds_siemens == 0.0 {
        return Err(Error::DegenerateElement(format!(
            "mos '{name}': gds = 0 leaves the drain-source resistor undefined"
        )));
    }
    Ok(vec![
        Element::Vccs {
            name: format!("{name}.gm"),
            nodes: [
                drain.clone(),
                source.clone(),
                gate.clone(),
                source.clone(),
            ],
            transconductance_siemens: *gm_siemens,
        },
        Element::Resistor {
            name: format!("{name}.gds"),
            nodes: [drain.clone(), source.clone()],
            resistance_ohms: 1.0 / gds_siemens,
        },
    ])
}

/// Union-find over node names with lexicographically-least representatives.
struct Merger {
    parent: HashMap<String, String>,
}

impl Merger {
    fn new(merges: &[(String, String)]) -> Self {
        let mut m = Merger {
            parent: HashMap::new(),
        };
        for (a, b) in merges {
            m.union(a, b);
        }
        m
    }

    fn find(&self, name: &str) -> String {
        let mut current = name.to_string();
        while let Some(p) = self.parent.get(&current) {
            if *p == current {
                break;
            }
            current = p.clone();
        }
        current
    }

    fn union(&mut self, a: &str, b: &str) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        // canonical representative: lexicographically least of the class
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(drop, keep.clone());
        self.parent.insert(keep.clone(), keep);
    }
}

/// Applies `.short` merges: rewrites every element onto canonical node names,
/// drops elements whose stamp collapses to zero, and builds the node map over
/// the surviving names.
///
/// Returns the merged netlist, the node map, and one note per dropped or
/// altered element. Index order is first appearance unless the netlist
/// carries an `.order` directive.
pub fn apply_merges(netlist: &Netlist) -> Result<(Netlist, NodeMap, Vec<String>)> {
    let merger = Merger::new(&netlist.merges);
    let mut notes = Vec::new();
    let mut elements = Vec::new();

    for element in &netlist.elements {
        match element {
            Element::Resistor {
                name,
                nodes: [a, b],
                resistance_ohms,
            } => {
                let (a, b) = (merger.find(a), merger.find(b));
                if a == b {
                    notes.push(format!(
                        "resistor '{name}' collapsed onto node '{a}' by merging; dropped"
                    ));
                } else {
                    elements.push(Element::Resistor {
                        name: name.clone(),
                        nodes: [a, b],
                        resistance_ohms: *resistance_ohms,
                    });
                }
            }
            Element::Vccs {
                name,
                nodes: [k, kp, j, jp],
                transconductance_siemens,
            } => {
                let (k, kp) = (merger.find(k), merger.find(kp));
                let (j, jp) = (merger.find(j), merger.find(jp));
                if k == kp {
                    notes.push(format!(
                        "vccs '{name}' output pair collapsed onto '{k}' by merging; dropped"
                    ));
                } else if j == jp {
                    notes.push(format!(
                        "vccs '{name}' control pair collapsed onto '{j}' by merging; dropped"
                    ));
                } else {
                    elements.push(Element::Vccs {
                        name: name.clone(),
                        nodes: [k, kp, j, jp],
                        transconductance_siemens: *transconductance_siemens,
                    });
                }
            }
            Element::Mos {
                name,
                nodes: [d, g, s],
                gm_siemens,
                gds_siemens,
            } => {
                let (d, g, s) = (merger.find(d), merger.find(g), merger.find(s));
                if d == s {
                    notes.push(format!(
                        "mos '{name}' drain and source collapsed onto '{d}' by merging; dropped"
                    ));
                } else if g == s {
                    // gate-source control collapsed: only the output resistor remains
                    notes.push(format!(
                        "mos '{name}' gate and source collapsed onto '{g}' by merging; \
                         transconductance inert, kept as 1/gds resistor"
                    ));
                    if *gds_siemens == 0.0 {
                        return Err(Error::DegenerateElement(format!(
                            "mos '{name}': gds = 0 leaves the drain-source resistor undefined"
                        )));
                    }
                    elements.push(Element::Resistor {
                        name: format!("{name}.gds"),
                        nodes: [d, s],
                        resistance_ohms: 1.0 / gds_siemens,
                    });
                } else {
                    elements.push(Element::Mos {
                        name: name.clone(),
                        nodes: [d, g, s],
                        gm_siemens: *gm_siemens,
                        gds_siemens: *gds_siemens,
                    });
                }
            }
        }
    }

    // first-appearance order over canonical names
    let mut names = Vec::new();
    let mut seen = HashMap::new();
    for element in &elements {
        for node in element.node_names() {
            if !seen.contains_key(node) {
                seen.insert(node.clone(), names.len());
                names.push(node.clone());
            }
        }
    }

    let node_map = match &netlist.order {
        None => NodeMap::new(names)?,
        Some(order) => {
            let canonical: Vec<String> = order.iter().map(|n| merger.find(n)).collect();
            for n in &canonical {
                if !seen.contains_key(n) {
                    return Err(Error::UnknownNode(n.clone()));
                }
            }
            let map = NodeMap::new(canonical)?;
            if map.len() != names.len() {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!(
                        ".order lists {} nodes but the netlist has {}",
                        map.len(),
                        names.len()
                    ),
                });
            }
            map
        }
    };

    let merged = Netlist {
        title: netlist.title.clone(),
        elements,
        merges: Vec::new(),
        order: netlist.order.clone(),
    };
    Ok((merged, node_map, notes))
}

/// Serializes a netlist back to text. Parsing the output reproduces the
/// netlist element-for-element.
pub fn write_netlist(netlist: &Netlist) -> String {
    let mut out = String::new();
    if let Some(title) = &netlist.title {
        out.push_str(&format!(".title {title}\n"));
    }
    for element in &netlist.elements {
        match element {
            Element::Resistor {
                name,
                nodes: [a, b],
                resistance_ohms,
            } => out.push_str(&format!("{name} {a} {b} {resistance_ohms}\n")),
            Element::Vccs {
                name,
                nodes: [k, kp, j, jp],
                transconductance_siemens,
            } => out.push_str(&format!("{name} {k} {kp} {j} {jp} {transconductance_siemens}\n")),
            Element::Mos {
                name,
                nodes: [d, g, s],
                gm_siemens,
                gds_siemens,
            } => out.push_str(&format!("{name} {d} {g} {s} gm={gm_siemens} gds={gds_siemens}\n")),
        }
    }
    for (a, b) in &netlist.merges {
        out.push_str(&format!(".short {a} {b}\n"));
    }
    if let Some(order) = &netlist.order {
        out.push_str(&format!(".order {}\n", order.join(" ")));
    }
    out
}
