// debug scratch — not committed
use arrsweep::arrangement::*;
use arrsweep::geom::ClosedPolyline;
use arrsweep::surgery::*;
use arrsweep::Rat;

fn sq(name: &str, x0: i64, y0: i64, x1: i64, y1: i64) -> ClosedPolyline<Rat> {
    ClosedPolyline::from_ints(name, &[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
}

fn main() {
    let mut arr = build_arrangement(
        vec![sq("g", 0, 0, 20, 20), sq("alpha", 4, 4, 12, 24), sq("beta", 8, 5, 16, 25)],
        "g", vec![],
    ).unwrap();
    for c in arr.curve_ids() {
        println!("{c} {}: walk {:?}", arr.curve_name(c), arr.walk(c));
    }
    for x in arr.crossing_ids() {
        let cr = arr.crossing(x);
        println!("{x}: {:?} sign {} at {:?}", cr.pair, cr.sign, cr.location.as_ref().map(|p| (p.x.to_string(), p.y.to_string())));
    }
    let tris = find_minimal_triangles_on_sweep(&arr);
    for t in &tris { println!("tri: {t:?}"); }
    let tri = tris[0].clone();
    println!("bypassing {tri:?}");
    match bypass_minimal_triangle(&mut arr, &tri) {
        Ok(r) => println!("OK {r:?}"),
        Err(e) => {
            println!("ERR: {e}");
            for c in arr.curve_ids() {
                println!("{c}: walk {:?}", arr.walk(c));
            }
        }
    }
}
