//! Example constructions shipped with the library.

pub struct Example {
    pub name: &'static str,
    pub file_name: &'static str,
    pub source: &'static str,
}

pub const PASCAL: &str = "\
# Conic through five points, traced by the hexagon construction
point A = (-2, 0)
point B = (-1, 1.5)
point C = (1, 1.8)
point D = (2.2, 0.3)
point E = (0.5, -1.5)
line a = join(A, B)
line b = join(D, E)
point F = meet(a, b)
line c = mover line_through(F)
line d = join(B, C)
point G = meet(c, d)
line e = join(C, D)
point H = meet(c, e)
line f = join(A, H)
line g = join(E, G)
point K = meet(f, g)
trace mover=c tracer=K
";

pub const PROJLINE: &str = "\
# Projection of a circle onto a line
point O = (0, 0)
circle c0 = circle(O, 1)
line b = (1, 0, -2)
point A = mover on_circle(c0)
line a = perp(b, A)
point B = meet(a, b)
trace mover=A tracer=B
";

pub const CONCHOID: &str = "\
# Conchoid of Nicomedes with pole B, base line g and distance 2
line g = (0, 1, 2)
point B = (0, 0)
point A = mover on_line(g)
circle c0 = circle(A, 2)
line h = join(A, B)
point C = meet_cl(c0, h, branch=0)
trace mover=A tracer=C
";

pub const WATT: &str = "\
# Watt curve
point A = (-2, 0)
point B = (2, 0)
circle c0 = circle(A, 2.5)
circle c1 = circle(B, 2.5)
point C = mover on_circle(c0)
circle c2 = circle(C, 3)
point D = meet_cc(c1, c2, branch=0)
point E = midpoint(C, D)
trace mover=C tracer=E
";

pub const FOURBAR: &str = "\
# Four-bar linkage, coupler midpoint
point A = (-2, 0)
point B = (2, 0)
circle c0 = circle(A, 1)
circle c1 = circle(B, 2)
point C = mover on_circle(c0)
circle c2 = circle(C, 4)
point D = meet_cc(c1, c2, branch=1)
point E = midpoint(C, D)
trace mover=C tracer=E
";

pub const EXAMPLES: [Example; 4] = [
    Example {
        name: "pascal",
        file_name: "pascal.cons",
        source: PASCAL,
    },
    Example {
        name: "projline",
        file_name: "projline.cons",
        source: PROJLINE,
    },
    Example {
        name: "conchoid",
        file_name: "conchoid.cons",
        source: CONCHOID,
    },
    Example {
        name: "watt",
        file_name: "watt.cons",
        source: WATT,
    },
];

pub fn example(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}
