public class App {
    // simple version
    static int solve(int[] items, int right, int x, int num) {
        if (x > num) {
            return -1;
        }
        int idx = (x + num) / 2;
        if (items[idx] == right) {
            return idx;
        }
        if (items[idx] < right) {
            return solve(items, right, idx + 1, num);
        }
        return solve(items, right, x, idx - 1);
    }

    static int solve(int[] items, int right) {
        return solve(items, right, 0, items.length - 1);
    }

    public static void main(String[] args) {
        int[] data = {22, 43, 58, 60, 72, 88, 98, 103};
        int idx = solve(data, 43);
        System.out.printf("%s%n", idx);
    }
}
