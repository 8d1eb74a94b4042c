import init, { echo_series, echo_vs_lambda_i, alpha_vs_distance } from "./pkg/ising_echo_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function draw(xs, ys, xlabel, ylabel) {
  const c = $("plot");
  const g = c.getContext("2d");
  const pad = 50;
  g.clearRect(0, 0, c.width, c.height);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (c.width - 2 * pad);
  const py = (y) => c.height - pad - ((y - y0) / (y1 - y0)) * (c.height - 2 * pad);

  g.strokeStyle = "#888";
  g.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  g.fillStyle = "#222";
  g.font = "12px sans-serif";
  g.fillText(x0.toPrecision(3), pad, c.height - pad + 16);
  g.fillText(x1.toPrecision(3), c.width - pad - 30, c.height - pad + 16);
  g.fillText(y0.toPrecision(4), 2, c.height - pad);
  g.fillText(y1.toPrecision(4), 2, pad + 4);
  g.fillText(xlabel, c.width / 2, c.height - 12);
  g.fillText(ylabel, 8, pad - 14);

  g.strokeStyle = "#1060c0";
  g.lineWidth = 1.5;
  g.beginPath();
  xs.forEach((x, i) => (i ? g.lineTo(px(x), py(ys[i])) : g.moveTo(px(x), py(ys[i]))));
  g.stroke();
}

function run(action) {
  $("status").textContent = "";
  try {
    action();
  } catch (e) {
    $("status").textContent = String(e);
  }
}

await init();

$("series").onclick = () => run(() => {
  const tmax = num("tmax");
  const dt = Math.max(tmax / 1000, 0.01);
  const l = echo_series(num("n"), num("li"), num("lf"), num("eps"), num("d"), tmax, dt);
  draw(Array.from(l, (_, i) => i * dt), Array.from(l), "t", "L");
});

$("scan").onclick = () => run(() => {
  const [lo, hi, step] = [0.1, 3, 0.05];
  const l = echo_vs_lambda_i(num("n"), num("lf"), num("eps"), num("d"), num("tfix"), lo, hi, step);
  draw(Array.from(l, (_, i) => lo + i * step), Array.from(l), "lambda_i", "L(t)");
});

$("alpha").onclick = () => run(() => {
  const a = alpha_vs_distance(num("n"), num("li"), num("eps"));
  draw(Array.from(a, (_, i) => i + 1), Array.from(a), "d", "alpha");
});

$("series").click();
