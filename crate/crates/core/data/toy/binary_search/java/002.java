public class Program {
    static int go(int[] a, int left) {
        int x = 0;
        int val = a.length - 1;
        while (x <= val) {
            int u = x + (val - x) / 2;
            if (a[u] == left) {
                return u;
            } else if (a[u] < left) {
                x = u + 1;
            } else {
                val = u - 1;
            }
        }
        return -1;
    }

    public static void main(String[] args) {
        int[] xs = {38, 42, 57, 81, 105, 113, 118};
        int u = go(xs, 52);
        System.out.println("result: " + u);
    }
}
