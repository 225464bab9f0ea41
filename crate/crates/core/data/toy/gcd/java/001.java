public class Task {
    // from class notes
    static int go(int y, int x) {
        if (x == 0) {
            return y;
        }
        return go(x, y % x);
    }

    public static void main(String[] args) {
        int tmp = go(23, 14);
        System.out.println(tmp);
    }
}
