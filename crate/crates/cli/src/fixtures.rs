//! Bundled example problems, embedded at build time so the binary can list
//! and re-emit them without a checkout.

/// One bundled problem: its name (also the stem of `examples/<name>.prob`),
/// a one-line description, and the file text.
pub struct Fixture {
    pub name: &'static str,
    pub blurb: &'static str,
    pub text: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "ex_5_2",
        blurb: "periodic pair on a union of intervals; two trough escapes with distinct limit values",
        text: include_str!("../../../examples/ex_5_2.prob"),
    },
    Fixture {
        name: "ex_5_3",
        blurb: "product objective on the quadrant; hyperbola escape visible only to the tangency estimate",
        text: include_str!("../../../examples/ex_5_3.prob"),
    },
    Fixture {
        name: "ex_5_8",
        blurb: "cubic-type objective with a kinked partner; valley escape refutes the restricted conditions",
        text: include_str!("../../../examples/ex_5_8.prob"),
    },
    Fixture {
        name: "ex_5_9",
        blurb: "difference quadratic with -x1; diagonal escape splits tangency from residual decay",
        text: include_str!("../../../examples/ex_5_9.prob"),
    },
    Fixture {
        name: "toy_quadrant",
        blurb: "coordinate projections on the quadrant; weak front is both axes, strong front the origin",
        text: include_str!("../../../examples/toy_quadrant.prob"),
    },
    Fixture {
        name: "coercive_pair",
        blurb: "two coercive objectives, one kink; compact sublevel sets, vacuous asymptotics",
        text: include_str!("../../../examples/coercive_pair.prob"),
    },
    Fixture {
        name: "compact_box",
        blurb: "linear objectives on a compact box; nothing escapes",
        text: include_str!("../../../examples/compact_box.prob"),
    },
    Fixture {
        name: "single_valley",
        blurb: "one kinked objective on the quadrant; minimizer on the crease and the boundary",
        text: include_str!("../../../examples/single_valley.prob"),
    },
    Fixture {
        name: "tradeoff_segment",
        blurb: "two shifted paraboloids; optima fill the segment between the centers",
        text: include_str!("../../../examples/tradeoff_segment.prob"),
    },
];
